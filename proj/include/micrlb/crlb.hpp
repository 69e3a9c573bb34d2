#pragma once

#include "micrlb/fim.hpp"

#include <string>
#include <vector>

namespace micrlb {

struct CrlbOptions {
    double cond_threshold = 1e12;
    /// Fall back to a pseudo-inverse when the FIM is singular. Reports carry
    /// pseudo_inverse = true whenever it was used.
    bool allow_pseudo_inverse = false;
};

struct CrlbReport {
    std::vector<double> per_node_bound;  // m^2, trace of each thing's 3x3 inverse block
    double aggregate_bound = 0.0;        // mean of per_node_bound
    double paper_formula_bound = 0.0;    // per-axis block-inverse form; NaN if a block is singular
    double condition_number = 0.0;       // of the Jacobi-equilibrated FIM
    bool singular = false;
    bool indefinite = false;
    bool pseudo_inverse = false;
    FimMode mode = FimMode::Standard;
};

class SingularBlockError : public std::runtime_error {
public:
    SingularBlockError(std::string block, double condition);
    const std::string& block() const { return block_; }
    double condition() const { return condition_; }

private:
    std::string block_;
    double condition_;
};

/// Mean over things of diag(I_xx^-1 + I_yy^-1 + I_zz^-1). Throws
/// SingularBlockError naming the first block whose condition number exceeds
/// the threshold.
double crlb_paper(const FimMatrix& fim, double cond_threshold = 1e12);

/// Trace-of-inverse bound. The FIM is split into independent groups of
/// coupled things, Jacobi-equilibrated, and inverted through a symmetric
/// eigendecomposition. Singularity (condition number above threshold, or a
/// non-positive eigenvalue) is reported, never thrown; per-node bounds are
/// +inf in that case unless the pseudo-inverse fallback is enabled.
CrlbReport crlb_standard(const FimMatrix& fim, const CrlbOptions& options = {});

}  // namespace micrlb
