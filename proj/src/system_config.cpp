#include "asvs/system_config.hpp"

#include <sstream>

#include "asvs/errors.hpp"

namespace asvs {

void SystemConfig::validate() const {
  if (weights.generation < 0 || weights.singer < 0 || weights.adversarial < 0)
    throw ConfigError("loss weights must be non-negative");
  if (!use_classifier && weights.singer != 0)
    throw ConfigError("lambda_S is non-zero but the singer classifier is disabled");
  if (!use_mrwds && weights.adversarial != 0)
    throw ConfigError("lambda_D is non-zero but the discriminators are disabled");
  if (use_classifier && !multi_singer)
    throw ConfigError("the singer classifier needs multi-singer training");
}

SystemConfig system_preset(int id) {
  SystemConfig s;
  s.system_id = id;
  switch (id) {
    case 1: s.weights = {1, 0, 0}; break;
    case 2: s.multi_singer = true; s.weights = {1, 0, 0}; break;
    case 3:
      s.multi_singer = s.use_classifier = true;
      s.weights = {1, 1, 0};
      break;
    case 4:
      s.multi_singer = s.use_mrwds = true;
      s.weights = {10, 0, 1};
      break;
    case 5:
      s.multi_singer = s.use_classifier = s.use_mrwds = true;
      s.weights = {10, 2, 1};
      break;
    default: throw ConfigError("system id must be in 1..5, got " + std::to_string(id));
  }
  return s;
}

std::string describe(const SystemConfig& s) {
  std::ostringstream os;
  os << "System" << s.system_id << " multi_singer=" << s.multi_singer
     << " classifier=" << s.use_classifier << " mrwds=" << s.use_mrwds << " weights=["
     << s.weights.generation << "," << s.weights.singer << "," << s.weights.adversarial << "]";
  return os.str();
}

}  // namespace asvs
