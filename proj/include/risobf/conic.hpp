// SPDX-License-Identifier: Apache-2.0
//
// Solver-agnostic SOCP description over real variables:
//
//   maximize    objective^T x
//   subject to  a_i^T x <= b_i                      (linear rows)
//               ||A_j x + b_j||_2 <= f_j^T x + d_j   (second-order cones)
//
// Complex variables are lifted to interleaved (re, im) pairs.
#pragma once

#include "risobf/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace risobf {

struct VarBlock {
    std::string name;
    int offset = 0;
    int size = 0;          // number of real variables
    bool complex = false;  // interleaved re/im pairs
    double scale = 1.0;    // stored value = physical value / scale
};

struct LinearRow {
    RVec a;
    double b = 0.0;
    std::string tag;
};

struct SocBlock {
    RMat A;
    RVec b;
    RVec f;
    double d = 0.0;
    std::string tag;
    int dim() const { return static_cast<int>(A.rows()) + 1; }
};

class ConicProblem {
  public:
    int numVars() const { return n_; }

    /// Appends `count` variables (complex ones take two real slots each) and
    /// returns the offset of the block.
    int addBlock(const std::string& name, int count, bool complex = false, double scale = 1.0);
    const std::vector<VarBlock>& blocks() const { return blocks_; }
    const VarBlock& block(const std::string& name) const;

    RVec objective;
    double objectiveOffset = 0.0;
    std::vector<LinearRow> linear;
    std::vector<SocBlock> cones;

    void addLinear(RVec a, double b, std::string tag);
    void addCone(RMat A, RVec b, RVec f, double d, std::string tag);

    /// ||Q x + q||^2 <= f^T x + d as a rotated cone, after normalizing both
    /// sides by max(||Q||_F^2, ||q||^2, ||f||, |d|).
    void addQuadraticLe(const RMat& Q, const RVec& q, const RVec& f, double d, const std::string& tag);

    double objectiveValue(const RVec& x) const { return objective.dot(x) + objectiveOffset; }

    /// Largest violation over all rows (0 when feasible).
    double maxViolation(const RVec& x) const;
    /// True when every row holds within tol (absolute on the normalized rows).
    bool satisfied(const RVec& x, double tol) const;

    /// Checks block coverage, cone dimensions and row widths.
    void validate() const;

  private:
    int n_ = 0;
    std::vector<VarBlock> blocks_;
};

/// Real matrix mapping x to [Re(B z); Im(B z)], z the complex block at offset.
RMat lift_complex_map(const CMat& B, int offset, int numVars);
/// Real (re, im) offsets of B z as a stacked vector [Re; Im].
RVec lift_complex_vec(const CVec& v);
/// Real row r with r^T x = Re{l^H z}.
RVec lift_real_part_row(const CVec& l, int offset, int numVars);
/// Complex block z read back from x.
CVec read_complex(const RVec& x, int offset, int size);
void write_complex(RVec& x, int offset, const CVec& z);

/// Text serialization (see docs/problem_dump.md for the field order).
void dump_problem(const ConicProblem& p, std::ostream& os);
ConicProblem parse_problem(std::istream& is);

}  // namespace risobf
