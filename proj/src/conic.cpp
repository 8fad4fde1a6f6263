// SPDX-License-Identifier: Apache-2.0
#include "risobf/conic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace risobf {

int ConicProblem::addBlock(const std::string& name, int count, bool complex, double scale) {
    require(count >= 0, "addBlock: negative size");
    require(scale > 0.0, "addBlock: scale must be > 0");
    for (const auto& b : blocks_) require(b.name != name, "addBlock: duplicate block " + name);
    const int size = complex ? 2 * count : count;
    blocks_.push_back({name, n_, size, complex, scale});
    const int offset = n_;
    n_ += size;
    RVec grown = RVec::Zero(n_);
    if (objective.size() > 0) grown.head(objective.size()) = objective;
    objective = grown;
    for (auto& r : linear) r.a.conservativeResizeLike(RVec::Zero(n_));
    for (auto& c : cones) {
        const auto old = c.A.cols();
        c.A.conservativeResize(Eigen::NoChange, n_);
        c.A.rightCols(n_ - old).setZero();
        c.f.conservativeResizeLike(RVec::Zero(n_));
    }
    return offset;
}

const VarBlock& ConicProblem::block(const std::string& name) const {
    for (const auto& b : blocks_) {
        if (b.name == name) return b;
    }
    throw InvalidArgument("unknown variable block " + name);
}

void ConicProblem::addLinear(RVec a, double b, std::string tag) {
    require(a.size() == n_, "addLinear: row width mismatch");
    linear.push_back({std::move(a), b, std::move(tag)});
}

void ConicProblem::addCone(RMat A, RVec b, RVec f, double d, std::string tag) {
    require(A.cols() == n_ && f.size() == n_ && b.size() == A.rows(), "addCone: dimension mismatch");
    require(A.rows() >= 1, "addCone: cone dimension must be >= 2");
    cones.push_back({std::move(A), std::move(b), std::move(f), d, std::move(tag)});
}

void ConicProblem::addQuadraticLe(const RMat& Q, const RVec& q, const RVec& f, double d, const std::string& tag) {
    require(Q.cols() == n_ && f.size() == n_ && q.size() == Q.rows(), "addQuadraticLe: dimension mismatch");
    double kappa = std::max({Q.squaredNorm(), q.squaredNorm(), f.norm(), std::abs(d)});
    if (!(kappa > 0.0)) kappa = 1.0;
    const double sq = std::sqrt(kappa);
    // ||v||^2 <= t  <=>  ||(2v, t - 1)|| <= t + 1
    const auto m = Q.rows();
    RMat A(m + 1, n_);
    RVec b(m + 1);
    A.topRows(m) = (2.0 / sq) * Q;
    b.head(m) = (2.0 / sq) * q;
    A.row(m) = f.transpose() / kappa;
    b(m) = d / kappa - 1.0;
    addCone(std::move(A), std::move(b), f / kappa, d / kappa + 1.0, tag);
}

double ConicProblem::maxViolation(const RVec& x) const {
    double worst = 0.0;
    for (const auto& r : linear) worst = std::max(worst, r.a.dot(x) - r.b);
    for (const auto& c : cones) worst = std::max(worst, (c.A * x + c.b).norm() - (c.f.dot(x) + c.d));
    return worst;
}

bool ConicProblem::satisfied(const RVec& x, double tol) const {
    return x.size() == n_ && x.allFinite() && maxViolation(x) <= tol;
}

void ConicProblem::validate() const {
    std::vector<int> cover(static_cast<std::size_t>(n_), 0);
    for (const auto& b : blocks_) {
        for (int i = b.offset; i < b.offset + b.size; ++i) ++cover[static_cast<std::size_t>(i)];
    }
    for (int c : cover) require(c == 1, "problem: variable blocks must cover every variable exactly once");
    require(objective.size() == n_, "problem: objective width mismatch");
    for (const auto& r : linear) require(r.a.size() == n_, "problem: linear row width mismatch");
    for (const auto& c : cones) {
        require(c.dim() >= 2, "problem: cone dimension must be >= 2");
        require(c.A.cols() == n_ && c.f.size() == n_ && c.b.size() == c.A.rows(), "problem: cone width mismatch");
    }
}

RMat lift_complex_map(const CMat& B, int offset, int numVars) {
    const auto m = B.rows();
    const auto p = B.cols();
    require(offset >= 0 && offset + 2 * p <= numVars, "lift_complex_map: block out of range");
    RMat out = RMat::Zero(2 * m, numVars);
    for (Eigen::Index j = 0; j < p; ++j) {
        const int cr = offset + 2 * static_cast<int>(j);
        for (Eigen::Index i = 0; i < m; ++i) {
            const cplx v = B(i, j);
            out(i, cr) = v.real();
            out(i, cr + 1) = -v.imag();
            out(m + i, cr) = v.imag();
            out(m + i, cr + 1) = v.real();
        }
    }
    return out;
}

RVec lift_complex_vec(const CVec& v) {
    RVec out(2 * v.size());
    out.head(v.size()) = v.real();
    out.tail(v.size()) = v.imag();
    return out;
}

RVec lift_real_part_row(const CVec& l, int offset, int numVars) {
    require(offset >= 0 && offset + 2 * l.size() <= numVars, "lift_real_part_row: block out of range");
    RVec r = RVec::Zero(numVars);
    for (Eigen::Index j = 0; j < l.size(); ++j) {
        r(offset + 2 * j) = l(j).real();
        r(offset + 2 * j + 1) = l(j).imag();
    }
    return r;
}

CVec read_complex(const RVec& x, int offset, int size) {
    require(offset >= 0 && offset + 2 * size <= x.size(), "read_complex: block out of range");
    CVec z(size);
    for (int j = 0; j < size; ++j) z(j) = cplx(x(offset + 2 * j), x(offset + 2 * j + 1));
    return z;
}

void write_complex(RVec& x, int offset, const CVec& z) {
    require(offset >= 0 && offset + 2 * z.size() <= x.size(), "write_complex: block out of range");
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        x(offset + 2 * j) = z(j).real();
        x(offset + 2 * j + 1) = z(j).imag();
    }
}

// ---------------------------------------------------------------------------
// Text dump

namespace {

std::string safe_tag(const std::string& tag) {
    if (tag.empty()) return "-";
    std::string out = tag;
    std::replace_if(out.begin(), out.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }, '_');
    return out;
}

void write_row(std::ostream& os, const RVec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
    os << '\n';
}

RVec read_row(std::istream& is, int n) {
    RVec v(n);
    for (int i = 0; i < n; ++i) {
        require(static_cast<bool>(is >> v(i)), "parse_problem: truncated row");
    }
    return v;
}

void expect(std::istream& is, const std::string& word) {
    std::string got;
    require(static_cast<bool>(is >> got) && got == word, "parse_problem: expected '" + word + "'");
}

}  // namespace

void dump_problem(const ConicProblem& p, std::ostream& os) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    os << "risobf-conic 1\n";
    os << "vars " << p.numVars() << '\n';
    os << "blocks " << p.blocks().size() << '\n';
    for (const auto& b : p.blocks()) {
        os << "block " << safe_tag(b.name) << ' ' << b.offset << ' ' << b.size << ' ' << (b.complex ? 1 : 0) << ' '
           << b.scale << '\n';
    }
    os << "objective " << p.objectiveOffset << '\n';
    write_row(os, p.objective);
    os << "linear " << p.linear.size() << '\n';
    for (const auto& r : p.linear) {
        os << "row " << safe_tag(r.tag) << ' ' << r.b << '\n';
        write_row(os, r.a);
    }
    os << "cones " << p.cones.size() << '\n';
    for (const auto& c : p.cones) {
        os << "cone " << safe_tag(c.tag) << ' ' << c.A.rows() << ' ' << c.d << '\n';
        write_row(os, c.f);
        for (Eigen::Index i = 0; i < c.A.rows(); ++i) {
            os << c.b(i);
            for (Eigen::Index j = 0; j < c.A.cols(); ++j) os << ' ' << c.A(i, j);
            os << '\n';
        }
    }
    os << "end\n";
    os.flags(flags);
    os.precision(prec);
}

ConicProblem parse_problem(std::istream& is) {
    expect(is, "risobf-conic");
    int version = 0;
    require(static_cast<bool>(is >> version) && version == 1, "parse_problem: unsupported version");
    int n = 0;
    std::size_t count = 0;
    expect(is, "vars");
    require(static_cast<bool>(is >> n) && n >= 0, "parse_problem: bad variable count");
    expect(is, "blocks");
    require(static_cast<bool>(is >> count), "parse_problem: bad block count");
    ConicProblem p;
    for (std::size_t i = 0; i < count; ++i) {
        expect(is, "block");
        std::string name;
        int offset = 0, size = 0, cx = 0;
        double scale = 1.0;
        require(static_cast<bool>(is >> name >> offset >> size >> cx >> scale), "parse_problem: bad block line");
        require(offset == p.numVars(), "parse_problem: blocks must be contiguous");
        p.addBlock(name, cx ? size / 2 : size, cx != 0, scale);
    }
    require(p.numVars() == n, "parse_problem: blocks do not cover the variables");
    expect(is, "objective");
    require(static_cast<bool>(is >> p.objectiveOffset), "parse_problem: bad objective offset");
    p.objective = read_row(is, n);
    expect(is, "linear");
    require(static_cast<bool>(is >> count), "parse_problem: bad linear count");
    for (std::size_t i = 0; i < count; ++i) {
        expect(is, "row");
        std::string tag;
        double b = 0.0;
        require(static_cast<bool>(is >> tag >> b), "parse_problem: bad row header");
        p.addLinear(read_row(is, n), b, tag);
    }
    expect(is, "cones");
    require(static_cast<bool>(is >> count), "parse_problem: bad cone count");
    for (std::size_t i = 0; i < count; ++i) {
        expect(is, "cone");
        std::string tag;
        int m = 0;
        double d = 0.0;
        require(static_cast<bool>(is >> tag >> m >> d) && m >= 1, "parse_problem: bad cone header");
        RVec f = read_row(is, n);
        RMat A(m, n);
        RVec b(m);
        for (int r = 0; r < m; ++r) {
            RVec line = read_row(is, n + 1);
            b(r) = line(0);
            A.row(r) = line.tail(n).transpose();
        }
        p.addCone(std::move(A), std::move(b), std::move(f), d, tag);
    }
    expect(is, "end");
    return p;
}

}  // namespace risobf
