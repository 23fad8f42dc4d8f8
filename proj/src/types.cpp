#include "postcls/types.hpp"

namespace postcls {

const char* to_string(Method m) {
    switch (m) {
        case Method::CsPost: return "CS+post";
        case Method::L1Cls: return "L1CLS";
        case Method::Lasso: return "Lasso";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    if (name == "CS+post" || name == "cs" || name == "cs_post") return Method::CsPost;
    if (name == "L1CLS" || name == "l1cls" || name == "l1_cls") return Method::L1Cls;
    if (name == "Lasso" || name == "lasso") return Method::Lasso;
    throw Error("unknown method '" + name + "'");
}

const char* to_string(SolvePath path) {
    switch (path) {
        case SolvePath::LinearSystem: return "linear_system";
        case SolvePath::PseudoInverse: return "pseudo_inverse";
        case SolvePath::ProjectedGradient: return "projected_gradient";
    }
    return "?";
}

}  // namespace postcls
