#pragma once

#include <optional>
#include <string>

#include "ssmkit/data.hpp"
#include "ssmkit/model.hpp"

namespace ssm {

struct Checkpoint {
  int format_version = 1;
  ParamModel model;
  std::optional<NormalizationStats> norm;
  int epoch = 0;
  double best_val_loss = 0.0;
  std::uint64_t seed = 0;
};

/// JSON serialization; doubles round-trip bit-exactly through the shortest
/// decimal representation, so save/load/save is byte-stable.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);

}  // namespace ssm
