#pragma once

#include <string>

#include "asvs/losses.hpp"

namespace asvs {

/// One rung of the ablation ladder: which modules are active and how the
/// generator loss terms are weighted.
struct SystemConfig {
  int system_id = 1;
  bool multi_singer = false;
  bool use_classifier = false;
  bool use_mrwds = false;
  LossWeights weights;

  /// Throws ConfigError when an active module has zero weight or an inactive
  /// one has a non-zero weight, or a weight is negative.
  void validate() const;
};

/// System 1 single-singer baseline [1,0,0]; 2 multi-singer [1,0,0];
/// 3 +classifier [1,1,0]; 4 +MRWDs [10,0,1]; 5 +both [10,2,1].
SystemConfig system_preset(int system_id);

std::string describe(const SystemConfig& cfg);

}  // namespace asvs
