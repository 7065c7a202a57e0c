#pragma once

#include <map>
#include <optional>
#include <string>

#include "twistlab/sparse_vec.hpp"

namespace twistlab::cache {

/// File-backed memo of exact Tsirelson values, keyed by a hash of the
/// canonical entry list. The file is a versioned JSON map; unknown versions
/// are ignored rather than migrated.
class TsirelsonCache {
 public:
  explicit TsirelsonCache(std::string dir);

  static std::string keyFor(const QVec& x, const std::string& tag);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& value);

  void load();
  bool save() const;
  std::string filePath() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::string dir_;
  std::map<std::string, std::string> entries_;
};

/// Default cache directory from the environment; empty when caching is off.
std::string defaultCacheDir();

}  // namespace twistlab::cache
