// SPDX-License-Identifier: Apache-2.0
//
// Standard form used internally:
//   minimize c^T x  s.t.  G x + s = h,  s in K = R_+^l x Q^{q_1} x ... x Q^{q_p}
// solved through the homogeneous self-dual embedding with NT scaling.
#include "risobf/socp_solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace risobf {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

RVec SolveResult::block(const ConicProblem& p, const std::string& name) const {
    const VarBlock& b = p.block(name);
    require(x.size() == p.numVars(), "SolveResult: no primal values");
    return x.segment(b.offset, b.size);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeDims {
    int l = 0;
    std::vector<int> q;
    std::vector<int> off;  // offset of each SOC block
    int m = 0;
    int degree() const { return l + static_cast<int>(q.size()); }
};

struct Scaling {
    RVec lpD;  // sqrt(s/z)
    std::vector<double> beta;
    std::vector<RVec> w;  // normalized w-bar per SOC
};

struct StandardForm {
    RVec c;
    RMat G;
    RVec h;
    ConeDims dims;
};

StandardForm to_standard(const ConicProblem& p) {
    StandardForm sf;
    const int n = p.numVars();
    int m = static_cast<int>(p.linear.size());
    for (const auto& c : p.cones) m += c.dim();
    sf.c = -p.objective;
    sf.G = RMat::Zero(m, n);
    sf.h = RVec::Zero(m);
    sf.dims.l = static_cast<int>(p.linear.size());
    int row = 0;
    for (const auto& r : p.linear) {
        double s = r.a.norm();
        if (!(s > 0.0)) s = 1.0;
        sf.G.row(row) = r.a.transpose() / s;
        sf.h(row) = r.b / s;
        ++row;
    }
    for (const auto& c : p.cones) {
        double s = std::max(c.f.norm(), c.A.rowwise().norm().maxCoeff());
        if (!(s > 0.0)) s = 1.0;
        sf.dims.off.push_back(row);
        sf.dims.q.push_back(c.dim());
        sf.G.row(row) = -c.f.transpose() / s;
        sf.h(row) = c.d / s;
        sf.G.block(row + 1, 0, c.A.rows(), n) = -c.A / s;
        sf.h.segment(row + 1, c.A.rows()) = c.b / s;
        row += c.dim();
    }
    sf.dims.m = m;
    return sf;
}

// --- cone algebra -----------------------------------------------------------

double soc_residual(const Eigen::Ref<const RVec>& u) { return u(0) - u.tail(u.size() - 1).norm(); }

// Smallest "eigenvalue" per cone, i.e. how far u is inside K.
double min_eig(const RVec& u, const ConeDims& d) {
    double v = kInf;
    for (int i = 0; i < d.l; ++i) v = std::min(v, u(i));
    for (std::size_t k = 0; k < d.q.size(); ++k) v = std::min(v, soc_residual(u.segment(d.off[k], d.q[k])));
    return v;
}

RVec identity_e(const ConeDims& d) {
    RVec e = RVec::Zero(d.m);
    e.head(d.l).setOnes();
    for (std::size_t k = 0; k < d.q.size(); ++k) e(d.off[k]) = 1.0;
    return e;
}

RVec jordan_prod(const RVec& u, const RVec& v, const ConeDims& d) {
    RVec r(d.m);
    r.head(d.l) = u.head(d.l).cwiseProduct(v.head(d.l));
    for (std::size_t k = 0; k < d.q.size(); ++k) {
        const int o = d.off[k], n = d.q[k];
        r(o) = u.segment(o, n).dot(v.segment(o, n));
        r.segment(o + 1, n - 1) = u(o) * v.segment(o + 1, n - 1) + v(o) * u.segment(o + 1, n - 1);
    }
    return r;
}

// x with lambda o x = v.
RVec jordan_div(const RVec& lam, const RVec& v, const ConeDims& d) {
    RVec r(d.m);
    r.head(d.l) = v.head(d.l).cwiseQuotient(lam.head(d.l));
    for (std::size_t k = 0; k < d.q.size(); ++k) {
        const int o = d.off[k], n = d.q[k];
        const auto l1 = lam.segment(o + 1, n - 1);
        const auto v1 = v.segment(o + 1, n - 1);
        const double l0 = lam(o);
        const double det = l0 * l0 - l1.squaredNorm();
        const double x0 = (l0 * v(o) - l1.dot(v1)) / det;
        r(o) = x0;
        r.segment(o + 1, n - 1) = (v1 - x0 * l1) / l0;
    }
    return r;
}

// Largest a with u + a*du in K (inf if unbounded).
double max_step(const RVec& u, const RVec& du, const ConeDims& d) {
    double a = kInf;
    for (int i = 0; i < d.l; ++i) {
        if (du(i) < 0.0) a = std::min(a, -u(i) / du(i));
    }
    for (std::size_t k = 0; k < d.q.size(); ++k) {
        const int o = d.off[k], n = d.q[k];
        const double u0 = u(o), d0 = du(o);
        const auto u1 = u.segment(o + 1, n - 1);
        const auto d1 = du.segment(o + 1, n - 1);
        if (d0 >= d1.norm()) continue;
        const double qa = d0 * d0 - d1.squaredNorm();
        const double qb = 2.0 * (u0 * d0 - u1.dot(d1));
        const double qc = std::max(0.0, u0 * u0 - u1.squaredNorm());
        double root = kInf;
        if (std::abs(qa) < 1e-300) {
            if (qb < 0.0) root = -qc / qb;
        } else {
            const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
            const double t = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
            const double r1 = t / qa;
            const double r2 = (t != 0.0) ? qc / t : kInf;
            for (double r : {r1, r2}) {
                if (r >= 0.0 && r < root) root = r;
            }
            if (root == kInf && qc <= 0.0) root = 0.0;
        }
        // Guard against the lower nappe.
        if (d0 < 0.0) root = std::min(root, -u0 / d0);
        a = std::min(a, root);
    }
    return a;
}

Scaling nt_scaling(const RVec& s, const RVec& z, const ConeDims& d) {
    Scaling w;
    w.lpD = (s.head(d.l).cwiseQuotient(z.head(d.l))).cwiseSqrt();
    for (std::size_t k = 0; k < d.q.size(); ++k) {
        const int o = d.off[k], n = d.q[k];
        const RVec sk = s.segment(o, n);
        const RVec zk = z.segment(o, n);
        const double a = std::sqrt(std::max(1e-300, sk(0) * sk(0) - sk.tail(n - 1).squaredNorm()));
        const double b = std::sqrt(std::max(1e-300, zk(0) * zk(0) - zk.tail(n - 1).squaredNorm()));
        const RVec sb = sk / a;
        const RVec zb = zk / b;
        const double gam = std::sqrt(std::max(0.0, (sb.dot(zb) + 1.0) / 2.0));
        RVec wb(n);
        wb(0) = (sb(0) + zb(0)) / (2.0 * gam);
        wb.tail(n - 1) = (sb.tail(n - 1) - zb.tail(n - 1)) / (2.0 * gam);
        w.beta.push_back(std::sqrt(a / b));
        w.w.push_back(wb);
    }
    return w;
}

// y = W u (inverse = false) or W^{-1} u.
RVec apply_w(const Scaling& w, const RVec& u, const ConeDims& d, bool inverse) {
    RVec y(u.size());
    if (inverse) {
        y.head(d.l) = u.head(d.l).cwiseQuotient(w.lpD);
    } else {
        y.head(d.l) = u.head(d.l).cwiseProduct(w.lpD);
    }
    for (std::size_t k = 0; k < d.q.size(); ++k) {
        const int o = d.off[k], n = d.q[k];
        const RVec& wb = w.w[k];
        const double w0 = wb(0);
        const auto w1 = wb.tail(n - 1);
        const double u0 = u(o);
        const auto u1 = u.segment(o + 1, n - 1);
        const double wu = w1.dot(u1);
        const double sgn = inverse ? -1.0 : 1.0;
        const double f = inverse ? 1.0 / w.beta[k] : w.beta[k];
        y(o) = f * (w0 * u0 + sgn * wu);
        y.segment(o + 1, n - 1) = f * (sgn * u0 * w1 + u1 + (wu / (1.0 + w0)) * w1);
    }
    return y;
}

RMat apply_w_cols(const Scaling& w, const RMat& M, const ConeDims& d, bool inverse) {
    RMat out(M.rows(), M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) out.col(j) = apply_w(w, M.col(j), d, inverse);
    return out;
}

// Solves [0 G^T; G -W^2] [x; z] = [r1; r2] via normal equations.
class KktSolver {
  public:
    KktSolver(const RMat& G, const Scaling& w, const ConeDims& d) : G_(G), w_(w), d_(d) {
        Gt_ = apply_w_cols(w, G, d, true);
        N_ = Gt_.transpose() * Gt_;
        const double reg = 1e-13 * std::max(1.0, N_.diagonal().maxCoeff());
        RMat Nr = N_;
        Nr.diagonal().array() += reg;
        llt_.compute(Nr);
        ok_ = llt_.info() == Eigen::Success;
    }
    bool ok() const { return ok_; }

    void solve(const RVec& r1, const RVec& r2, RVec& x, RVec& z) const {
        solve_once(r1, r2, x, z);
        // Refinement against the unreduced system.
        for (int it = 0; it < 3; ++it) {
            const RVec e1 = r1 - G_.transpose() * z;
            const RVec e2 = r2 - G_ * x + apply_w(w_, apply_w(w_, z, d_, false), d_, false);
            RVec dx, dz;
            solve_once(e1, e2, dx, dz);
            x += dx;
            z += dz;
        }
    }

  private:
    void solve_once(const RVec& r1, const RVec& r2, RVec& x, RVec& z) const {
        const RVec wr2 = apply_w(w_, r2, d_, true);
        const RVec rhs = r1 + Gt_.transpose() * wr2;
        x = llt_.solve(rhs);
        z = apply_w(w_, Gt_ * x - wr2, d_, true);
    }

    const RMat& G_;
    const Scaling& w_;
    const ConeDims& d_;
    RMat Gt_;
    RMat N_;
    Eigen::LLT<RMat> llt_;
    bool ok_ = false;
};

struct Iterate {
    RVec x, s, z;
    double tau = 1.0, kappa = 1.0;
};

}  // namespace

SolveResult solve(const ConicProblem& problem, const SolverSettings& opt) {
    problem.validate();
    SolveResult res;
    const StandardForm sf = to_standard(problem);
    const ConeDims& d = sf.dims;
    const int n = problem.numVars();
    const int m = d.m;
    const RVec& c = sf.c;
    const RMat& G = sf.G;
    const RVec& h = sf.h;

    if (m == 0) {
        res.status = c.norm() == 0.0 ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
        res.x = RVec::Zero(n);
        res.objective = problem.objectiveValue(res.x);
        res.message = m == 0 && c.norm() != 0.0 ? "unbounded: no constraints" : "";
        return res;
    }

    const RVec e = identity_e(d);
    const double hnrm = std::max(1.0, h.norm());
    const double cnrm = std::max(1.0, c.norm());

    // Initial point: least-squares primal, minimum-norm dual, shifted into K.
    Iterate it;
    {
        RMat GtG = G.transpose() * G;
        GtG.diagonal().array() += 1e-12 * std::max(1.0, GtG.diagonal().maxCoeff());
        Eigen::LDLT<RMat> ldlt(GtG);
        it.x = ldlt.solve(G.transpose() * h);
        it.s = h - G * it.x;
        it.z = -G * ldlt.solve(c);
        const double ap = -min_eig(it.s, d);
        if (ap >= -1e-8 * std::max(1.0, it.s.norm())) it.s += (1.0 + std::max(0.0, ap)) * e;
        const double ad = -min_eig(it.z, d);
        if (ad >= -1e-8 * std::max(1.0, it.z.norm())) it.z += (1.0 + std::max(0.0, ad)) * e;
    }

    Iterate best;
    double bestMerit = kInf;
    bool converged = false;
    const double D = static_cast<double>(d.degree());

    for (int k = 0; k <= opt.maxIter; ++k) {
        res.iterations = k;
        const RVec rx = G.transpose() * it.z + c * it.tau;
        const RVec rz = it.s + G * it.x - h * it.tau;
        const double cx = c.dot(it.x), hz = h.dot(it.z);
        const double rt = it.kappa + cx + hz;
        const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / (D + 1.0);

        const double pres = rz.norm() / it.tau / hnrm;
        const double dres = rx.norm() / it.tau / cnrm;
        const double pcost = cx / it.tau, dcost = -hz / it.tau;
        const double gap = it.s.dot(it.z) / (it.tau * it.tau);
        const double relgap = gap / std::max(1e-300, std::max(std::abs(pcost), std::abs(dcost)));
        res.primalResidual = pres;
        res.dualResidual = dres;
        res.gap = gap;

        const double merit = std::max({pres, dres, std::min(gap, relgap)});
        if (merit < bestMerit) {
            bestMerit = merit;
            best = it;
        }
        if (pres <= opt.tol && dres <= opt.tol && (gap <= opt.tol || relgap <= opt.tol)) {
            converged = true;
            break;
        }
        // Infeasibility certificates.
        if (hz < 0.0) {
            const double pinf = (G.transpose() * it.z).norm() / cnrm / (-hz);
            if (pinf <= opt.tol) {
                res.status = SolveStatus::Infeasible;
                res.message = "primal infeasible";
                res.x = RVec::Zero(n);
                return res;
            }
        }
        if (cx < 0.0) {
            const double dinf = (G * it.x + it.s).norm() / hnrm / (-cx);
            if (dinf <= opt.tol) {
                res.status = SolveStatus::NumericalFailure;
                res.message = "unbounded";
                res.x = RVec::Zero(n);
                return res;
            }
        }
        if (k == opt.maxIter) break;

        const Scaling w = nt_scaling(it.s, it.z, d);
        const RVec lambda = apply_w(w, it.z, d, false);
        const KktSolver kkt(G, w, d);
        if (!kkt.ok()) {
            res.message = "KKT factorization failed";
            break;
        }
        RVec x2, z2;
        kkt.solve(-c, h, x2, z2);
        const double den2 = c.dot(x2) + h.dot(z2);

        auto direction = [&](double eta, const RVec& ds, double dk, RVec& dx, RVec& dz, RVec& dsOut, double& dtau,
                             double& dkap) {
            const RVec lds = jordan_div(lambda, ds, d);
            const RVec wlds = apply_w(w, lds, d, false);
            RVec x1, z1;
            kkt.solve(-eta * rx, -eta * rz - wlds, x1, z1);
            const double bt = -eta * rt - dk / it.tau;
            dtau = (bt - c.dot(x1) - h.dot(z1)) / (den2 - it.kappa / it.tau);
            dx = x1 + dtau * x2;
            dz = z1 + dtau * z2;
            // ds = W (lambda \ ds) - W^2 dz
            dsOut = wlds - apply_w(w, apply_w(w, dz, d, false), d, false);
            dkap = (dk - it.kappa * dtau) / it.tau;
        };
        auto step_len = [&](const RVec& ds, const RVec& dz, double dtau, double dkap) {
            double a = std::min(max_step(it.s, ds, d), max_step(it.z, dz, d));
            if (dtau < 0.0) a = std::min(a, -it.tau / dtau);
            if (dkap < 0.0) a = std::min(a, -it.kappa / dkap);
            return a;
        };

        // Predictor.
        RVec dxa, dza, dsa;
        double dta = 0.0, dka = 0.0;
        const RVec ll = jordan_prod(lambda, lambda, d);
        direction(1.0, -ll, -it.tau * it.kappa, dxa, dza, dsa, dta, dka);
        const double aa = std::min(1.0, step_len(dsa, dza, dta, dka));
        const double sigma = std::pow(1.0 - aa, 3.0);

        // Corrector.
        const RVec corr = jordan_prod(apply_w(w, dsa, d, true), apply_w(w, dza, d, false), d);
        RVec dx, dz, ds;
        double dt = 0.0, dkap = 0.0;
        direction(1.0 - sigma, -ll - corr + sigma * mu * e, -it.tau * it.kappa - dta * dka + sigma * mu, dx, dz, ds,
                  dt, dkap);
        const double amax = step_len(ds, dz, dt, dkap);
        const double a = std::min(1.0, 0.99 * amax);
        if (!(a > 1e-12) || !dx.allFinite() || !dz.allFinite()) {
            res.message = "step length collapsed";
            break;
        }
        it.x += a * dx;
        it.s += a * ds;
        it.z += a * dz;
        it.tau += a * dt;
        it.kappa += a * dkap;
        if (!(it.tau > 0.0) || !(it.kappa > 0.0)) {
            res.message = "homogeneous variables left the cone";
            break;
        }
    }

    const Iterate& fin = converged ? it : best;
    res.x = fin.x / fin.tau;
    if (!converged) {
        const RVec rz = fin.s + G * fin.x - h * fin.tau;
        const RVec rx = G.transpose() * fin.z + c * fin.tau;
        const double pres = rz.norm() / fin.tau / hnrm;
        const double dres = rx.norm() / fin.tau / cnrm;
        const double gap = fin.s.dot(fin.z) / (fin.tau * fin.tau);
        const double pc = c.dot(fin.x) / fin.tau;
        const double relgap = gap / std::max(1e-300, std::abs(pc));
        if (pres <= opt.reducedTol && dres <= opt.reducedTol && (gap <= opt.reducedTol || relgap <= opt.reducedTol)) {
            converged = true;
            res.reducedAccuracy = true;
        }
        res.primalResidual = pres;
        res.dualResidual = dres;
        res.gap = gap;
    }
    res.objective = problem.objectiveValue(res.x);
    res.maxViolation = problem.maxViolation(res.x);
    if (!converged) {
        res.status = SolveStatus::NumericalFailure;
        if (res.message.empty()) res.message = "iteration limit";
        return res;
    }
    if (!problem.satisfied(res.x, opt.revalidateTol)) {
        res.status = SolveStatus::NumericalFailure;
        res.message = "solution failed revalidation";
        return res;
    }
    res.status = SolveStatus::Optimal;
    return res;
}

}  // namespace risobf
