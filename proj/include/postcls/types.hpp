#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace postcls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

// Sorted, duplicate-free, 0-based column indices.
using IndexSet = std::vector<Index>;

/// Raised for every contract violation and numerical failure in the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method { CsPost, L1Cls, Lasso };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

/// Which branch post_cls_fit took to produce its estimate.
enum class SolvePath { LinearSystem, PseudoInverse, ProjectedGradient };

const char* to_string(SolvePath path);

struct FitResult {
    Vector beta;
    IndexSet support_used;
    Method method = Method::CsPost;
    int iterations = 0;
    double objective = 0.0;
    bool converged = true;
    bool fallback_used = false;
    SolvePath path = SolvePath::LinearSystem;
    double wall_time = 0.0;
    std::vector<double> objective_trace;
};

}  // namespace postcls
