#pragma once

#include <string>

namespace kdl {

enum class BoundKind { Lower, Upper, TwoSided };

inline const char* to_string(BoundKind b) {
  switch (b) {
    case BoundKind::Lower: return "lower";
    case BoundKind::Upper: return "upper";
    case BoundKind::TwoSided: return "two_sided";
  }
  return "?";
}

/// A named constant with how it was obtained. Names used: K_p, K_hat_p, C_d,
/// beta_infsup, C_K_lower_from_end, C_J_lower, end_ratio_max, and the
/// separation and duality summaries.
struct ConstantEstimate {
  std::string name;
  double p = 2.0;
  double value = 0.0;
  BoundKind bound = BoundKind::Lower;
  std::string method;
  double h = 0.0;
  std::string note;
};

}  // namespace kdl
