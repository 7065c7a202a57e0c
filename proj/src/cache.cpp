#include "twistlab/cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace twistlab::cache {

namespace {
constexpr int kCacheVersion = 1;
}

TsirelsonCache::TsirelsonCache(std::string dir) : dir_(std::move(dir)) { load(); }

std::string TsirelsonCache::keyFor(const QVec& x, const std::string& tag) {
  // FNV-1a over the canonical entry list
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  for (const auto& [j, v] : x.entries()) {
    mix(static_cast<std::uint64_t>(j));
    mix(static_cast<std::uint64_t>(v.num()));
    mix(static_cast<std::uint64_t>(v.den()));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string TsirelsonCache::filePath() const { return dir_ + "/tsirelson-cache.json"; }

std::optional<std::string> TsirelsonCache::lookup(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TsirelsonCache::store(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void TsirelsonCache::load() {
  entries_.clear();
  std::ifstream in(filePath());
  if (!in) return;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    return;  // corrupt cache: start fresh
  }
  if (!j.is_object() || j.value("version", 0) != kCacheVersion) return;
  if (!j.contains("entries") || !j["entries"].is_object()) return;
  for (const auto& [k, v] : j["entries"].items()) {
    if (v.is_string()) entries_[k] = v.get<std::string>();
  }
}

bool TsirelsonCache::save() const {
  nlohmann::json j;
  j["version"] = kCacheVersion;
  j["entries"] = nlohmann::json::object();
  for (const auto& [k, v] : entries_) j["entries"][k] = v;
  const std::string tmp = filePath() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return false;
    out << j.dump(1);
  }
  return std::rename(tmp.c_str(), filePath().c_str()) == 0;
}

std::string defaultCacheDir() {
  const char* env = std::getenv("TWISTLAB_CACHE_DIR");
  return env ? env : "";
}

}  // namespace twistlab::cache
