#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dtg/tensor.hpp"

namespace dtg {

// Versioned checkpoint container: magic "DTGC", a key/value metadata section
// (schedule and model configuration so sampling is reproducible from the file
// alone), then the named tensor table. Round-trips byte-exactly.
struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> meta;  // sorted by key on save
  ParamStore params;

  void set_meta(const std::string& key, const std::string& value);
  const std::string* find_meta(const std::string& key) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace dtg
