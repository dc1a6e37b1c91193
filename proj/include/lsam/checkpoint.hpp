#pragma once

#include <string>
#include <vector>

#include "lsam/dataset.hpp"
#include "lsam/ensemble.hpp"
#include "lsam/model.hpp"

namespace lsam {

// Versioned JSON checkpoint: model kind, config, feature schema, target
// labels, standardization statistics and the flat parameter arrays. Doubles
// are written with round-trip precision so reloading is bit-exact.
struct Checkpoint {
  std::string kind;  // "lsam" | "ensemble"
  LsamConfig lsam_config;
  EnsembleConfig ensemble_config;
  std::vector<SubsetSpec> subsets;        // ensemble only
  std::vector<std::uint8_t> trained;      // ensemble only
  std::vector<FeatureSchema> schema;
  std::string target_name;
  std::vector<std::string> class_labels;
  Standardizer standardizer;
  ParamStore params;

  LsamModel make_lsam() const;
  EnsembleModel make_ensemble() const;
};

Checkpoint checkpoint_of(const LsamModel& model, const std::string& target_name,
                         const std::vector<std::string>& class_labels,
                         const Standardizer& standardizer);

Checkpoint checkpoint_of(const EnsembleModel& model, const std::string& target_name,
                         const std::vector<std::string>& class_labels,
                         const Standardizer& standardizer);

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lsam
