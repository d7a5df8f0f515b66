#pragma once

// Five-point (three-point in 1D) Dirichlet stencil on the interior cells of
// a grid domain, with the two SPD solvers used by the Newton iterations.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "blowup/error.hpp"
#include "blowup/geometry.hpp"

namespace blowup {

// unknowns are the cells of the domain whose face neighbours all lie in it;
// the boundary layer carries Dirichlet data
struct Stencil {
    std::shared_ptr<const GridDomain> dom;
    int n = 0;
    int deg = 0;
    double inv_h2 = 0;
    std::vector<int> cell;                // unknown -> grid index
    std::vector<int> unknown_of;          // grid index -> unknown, -1 otherwise
    std::vector<std::array<int, 4>> nb;   // neighbour unknowns, -1 = Dirichlet cell
    std::vector<std::array<int, 4>> nb_cell;

    explicit Stencil(std::shared_ptr<const GridDomain> d) : dom(std::move(d))
    {
        const GridDomain& g = *dom;
        deg = g.neighbor_count();
        inv_h2 = 1.0 / (g.h * g.h);
        unknown_of.assign(g.size(), -1);
        for (int idx = 0; idx < g.size(); ++idx)
            if (g.inside(idx) && !g.is_boundary(idx)) {
                unknown_of[idx] = static_cast<int>(cell.size());
                cell.push_back(idx);
            }
        n = static_cast<int>(cell.size());
        if (n == 0) fail(ErrorCode::UnresolvedBoundary, "domain has no interior cell");
        nb.resize(n);
        nb_cell.resize(n);
        for (int u = 0; u < n; ++u) {
            const auto c = g.neighbors(cell[u]);
            for (int k = 0; k < 4; ++k) {
                nb_cell[u][k] = k < deg ? c[k] : -1;
                nb[u][k] = k < deg ? unknown_of[c[k]] : -1;
            }
        }
    }

    // y = (L/h^2 + diag) x, with L the graph Laplacian of the unknowns
    void apply(const std::vector<double>& diag, const std::vector<double>& x, std::vector<double>& y) const
    {
        y.resize(n);
        for (int u = 0; u < n; ++u) {
            double s = deg * x[u];
            for (int k = 0; k < deg; ++k)
                if (nb[u][k] >= 0) s -= x[nb[u][k]];
            y[u] = s * inv_h2 + diag[u] * x[u];
        }
    }
};

enum class LinearSolverKind { Cholesky, Pcg };

struct PcgStats {
    int iterations = 0;
    double relative_residual = 0;
    bool converged = false;
};

// Jacobi-preconditioned conjugate gradients on the matrix-free stencil
inline PcgStats pcg_solve(const Stencil& st, const std::vector<double>& diag, const std::vector<double>& rhs,
                          std::vector<double>& x, double rel_tol = 1e-12, int max_iter = 0)
{
    const int n = st.n;
    if (max_iter <= 0) max_iter = 20 * n + 100;
    x.assign(n, 0.0);
    std::vector<double> r = rhs, z(n), p(n), q(n), minv(n);
    for (int u = 0; u < n; ++u) minv[u] = 1.0 / (st.deg * st.inv_h2 + diag[u]);
    double bnorm = 0;
    for (double v : rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    PcgStats stats;
    if (bnorm == 0) {
        stats.converged = true;
        return stats;
    }
    for (int u = 0; u < n; ++u) z[u] = minv[u] * r[u];
    p = z;
    double rz = 0;
    for (int u = 0; u < n; ++u) rz += r[u] * z[u];
    for (int it = 1; it <= max_iter; ++it) {
        st.apply(diag, p, q);
        double pq = 0;
        for (int u = 0; u < n; ++u) pq += p[u] * q[u];
        const double alpha = rz / pq;
        double rr = 0;
        for (int u = 0; u < n; ++u) {
            x[u] += alpha * p[u];
            r[u] -= alpha * q[u];
            rr += r[u] * r[u];
        }
        stats.iterations = it;
        stats.relative_residual = std::sqrt(rr) / bnorm;
        if (stats.relative_residual <= rel_tol) {
            stats.converged = true;
            return stats;
        }
        for (int u = 0; u < n; ++u) z[u] = minv[u] * r[u];
        double rz_new = 0;
        for (int u = 0; u < n; ++u) rz_new += r[u] * z[u];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int u = 0; u < n; ++u) p[u] = z[u] + beta * p[u];
    }
    return stats;
}

// Sparse LDL^T with the symbolic analysis done once; only the diagonal
// changes between Newton steps.
class CholeskySolver {
public:
    explicit CholeskySolver(const Stencil& st) : st_(st)
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(st.n) * (st.deg + 1));
        for (int u = 0; u < st.n; ++u) {
            trip.emplace_back(u, u, st.deg * st.inv_h2);
            for (int k = 0; k < st.deg; ++k)
                if (st.nb[u][k] >= 0) trip.emplace_back(u, st.nb[u][k], -st.inv_h2);
        }
        A_.resize(st.n, st.n);
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
        diag_ptr_.resize(st.n);
        for (int u = 0; u < st.n; ++u) diag_ptr_[u] = &A_.coeffRef(u, u);
        solver_.analyzePattern(A_);
    }

    void factorize(const std::vector<double>& diag)
    {
        for (int u = 0; u < st_.n; ++u) *diag_ptr_[u] = st_.deg * st_.inv_h2 + diag[u];
        solver_.factorize(A_);
        if (solver_.info() != Eigen::Success) fail(ErrorCode::NewtonDiverged, "sparse factorization failed");
    }

    void solve(const std::vector<double>& rhs, std::vector<double>& x) const
    {
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), st_.n);
        Eigen::VectorXd sol = solver_.solve(b);
        x.assign(sol.data(), sol.data() + st_.n);
    }

private:
    const Stencil& st_;
    Eigen::SparseMatrix<double> A_;
    std::vector<double*> diag_ptr_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

// one interface over both solvers for the Newton loop
class JacobianSolver {
public:
    JacobianSolver(const Stencil& st, LinearSolverKind kind) : st_(st), kind_(kind)
    {
        if (kind_ == LinearSolverKind::Cholesky) chol_ = std::make_unique<CholeskySolver>(st);
    }

    void solve(const std::vector<double>& diag, const std::vector<double>& rhs, std::vector<double>& x)
    {
        if (kind_ == LinearSolverKind::Cholesky) {
            chol_->factorize(diag);
            chol_->solve(rhs, x);
        } else {
            const auto stats = pcg_solve(st_, diag, rhs, x);
            if (!stats.converged) fail(ErrorCode::NewtonDiverged, "conjugate gradients did not converge");
        }
    }

private:
    const Stencil& st_;
    LinearSolverKind kind_;
    std::unique_ptr<CholeskySolver> chol_;
};

} // namespace blowup
