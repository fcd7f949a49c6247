#include "daflow/error.hpp"
#include "daflow/kernels.hpp"
#include "daflow/sparse.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <memory>

namespace daflow {

namespace kp = kernels::parallel;

Ilu0::Ilu0(const CsrMatrix& a) : lu_(a), diag_(a.n)
{
    const std::size_t n = a.n;
    for (std::size_t i = 0; i < n; ++i) {
        diag_[i] = lu_.diagonal_slot(i);
        if (diag_[i] == CsrMatrix::npos) throw PreconditionerError("ILU(0): row " + std::to_string(i) + " has no diagonal");
    }
    // IKJ variant restricted to the pattern of A.
    std::vector<std::size_t> where(n, CsrMatrix::npos);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t e = lu_.row_ptr[i]; e < lu_.row_ptr[i + 1]; ++e) where[lu_.cols[e]] = e;
        for (std::size_t e = lu_.row_ptr[i]; e < lu_.row_ptr[i + 1]; ++e) {
            const std::size_t kcol = lu_.cols[e];
            if (kcol >= i) break;
            const double pivot = lu_.vals[diag_[kcol]];
            if (pivot == 0.0) throw PreconditionerError("ILU(0): zero pivot in row " + std::to_string(kcol));
            const double lik = lu_.vals[e] / pivot;
            lu_.vals[e] = lik;
            for (std::size_t f = diag_[kcol] + 1; f < lu_.row_ptr[kcol + 1]; ++f) {
                const std::size_t w = where[lu_.cols[f]];
                if (w != CsrMatrix::npos) lu_.vals[w] -= lik * lu_.vals[f];
            }
        }
        for (std::size_t e = lu_.row_ptr[i]; e < lu_.row_ptr[i + 1]; ++e) where[lu_.cols[e]] = CsrMatrix::npos;
        if (lu_.vals[diag_[i]] == 0.0) throw PreconditionerError("ILU(0): zero pivot in row " + std::to_string(i));
    }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const
{
    const std::size_t n = lu_.n;
    for (std::size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (std::size_t e = lu_.row_ptr[i]; e < diag_[i]; ++e) s -= lu_.vals[e] * z[lu_.cols[e]];
        z[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = z[ii];
        for (std::size_t e = diag_[ii] + 1; e < lu_.row_ptr[ii + 1]; ++e) s -= lu_.vals[e] * z[lu_.cols[e]];
        z[ii] = s / lu_.vals[diag_[ii]];
    }
}

namespace {

using ApplyPrec = std::function<void(std::span<const double>, std::span<double>)>;

ApplyPrec make_preconditioner(const CsrMatrix& a, Preconditioner kind)
{
    if (kind == Preconditioner::Ilu0) {
        auto ilu = std::make_shared<Ilu0>(a);
        return [ilu](std::span<const double> r, std::span<double> z) { ilu->apply(r, z); };
    }
    auto inv = std::make_shared<std::vector<double>>(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        const double d = a.at(i, i);
        if (d == 0.0) throw PreconditionerError("Jacobi: zero diagonal in row " + std::to_string(i));
        (*inv)[i] = 1.0 / d;
    }
    return [inv](std::span<const double> r, std::span<double> z) {
        const auto n = static_cast<std::int64_t>(r.size());
        const double* d = inv->data();
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) z[i] = d[i] * r[i];
    };
}

}  // namespace

SolveResult solve_bicgstab(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                           const IterativeOptions& opts)
{
    const std::size_t n = a.n;
    if (b.size() != n || (!x0.empty() && x0.size() != n))
        throw AssemblyError("solve_bicgstab: vector length does not match matrix dimension");
    for (double v : b)
        if (!std::isfinite(v)) throw DomainError("solve_bicgstab: non-finite right-hand side");

    SolveResult out;
    out.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), out.x.begin());
    auto& x = out.x;
    auto& st = out.stats;

    st.rhs_norm = kp::norm2(b);
    if (st.rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        st.converged = true;
        return out;
    }
    const double target = opts.tol * st.rhs_norm;
    const std::size_t max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;
    const ApplyPrec prec = make_preconditioner(a, opts.preconditioner);

    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
    auto true_residual = [&]() {
        matvec(a, x, r);
        kp::xpby(b, -1.0, r);
        return kp::norm2(r);
    };

    st.residual = true_residual();
    if (st.residual <= target) {
        st.converged = true;
        return out;
    }

    bool fresh = true;
    std::size_t since_restart = 0;
    double rho_old = 1.0, alpha = 1.0, omega = 1.0;
    while (st.iterations < max_iter) {
        if (fresh) {
            std::copy(r.begin(), r.end(), rhat.begin());
            since_restart = 0;
        }
        const double rho = kp::dot(rhat, r);
        if (std::abs(rho) <= std::numeric_limits<double>::min() ||
            std::abs(rho) < 1e-30 * kp::norm2(rhat) * kp::norm2(r)) {
            if (since_restart == 0) {
                st.breakdown = true;
                break;
            }
            fresh = true;
            continue;
        }
        ++st.iterations;
        ++since_restart;
        if (fresh) {
            std::copy(r.begin(), r.end(), p.begin());
            fresh = false;
        } else {
            const double beta = (rho / rho_old) * (alpha / omega);
            kp::axpy(-omega, v, p);
            kp::xpby(r, beta, p);
        }
        prec(p, phat);
        matvec(a, phat, v);
        const double rv = kp::dot(rhat, v);
        if (rv == 0.0) {
            fresh = true;
            if (since_restart == 1) {
                st.breakdown = true;
                break;
            }
            continue;
        }
        alpha = rho / rv;
        std::copy(r.begin(), r.end(), s.begin());
        kp::axpy(-alpha, v, s);
        if (kp::norm2(s) <= target) {
            kp::axpy(alpha, phat, x);
            st.residual = true_residual();
            if (st.residual <= target) {
                st.converged = true;
                break;
            }
            fresh = true;
            continue;
        }
        prec(s, shat);
        matvec(a, shat, t);
        const double tt = kp::dot(t, t);
        omega = tt > 0.0 ? kp::dot(t, s) / tt : 0.0;
        kp::axpy(alpha, phat, x);
        kp::axpy(omega, shat, x);
        std::copy(s.begin(), s.end(), r.begin());
        kp::axpy(-omega, t, r);
        st.residual = kp::norm2(r);
        if (st.residual <= target) {
            st.residual = true_residual();
            if (st.residual <= target) {
                st.converged = true;
                break;
            }
            fresh = true;
            continue;
        }
        if (omega == 0.0) {
            fresh = true;
            continue;
        }
        rho_old = rho;
    }
    if (!st.converged) st.residual = true_residual();
    return out;
}

}  // namespace daflow
