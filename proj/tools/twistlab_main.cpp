// twistlab: batch experiment runner for the twisted-Hilbert norm laboratory.
//
// One experiment per invocation: a subcommand picks the experiment kind, a
// JSON config file (plus flag overrides) carries the parameters, and the
// report goes to stdout or to --out (json or csv). Exit status is 0 on
// success, 1 when a flagged violation occurred, 2 on usage errors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "twistlab/cache.hpp"
#include "twistlab/report.hpp"
#include "twistlab/version.hpp"

namespace {

using twistlab::report::ConfigError;
using twistlab::report::ExperimentConfig;
using twistlab::report::json;

json parseInlineVector(const std::string& text) {
  // "3:1,4:1,5:1" -> {"3":1, "4":1, "5":1}
  json out = json::object();
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("--vector: expected idx:value pairs");
    const std::string val = item.substr(colon + 1);
    if (val.find_first_of(".eE") == std::string::npos) {
      out[item.substr(0, colon)] = std::stoll(val);  // keep exact-mode integers exact
    } else {
      out[item.substr(0, colon)] = std::stod(val);
    }
    pos = comma + 1;
  }
  return out;
}

json parseIntList(const std::string& text) {
  json out = json::array();
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(std::stoi(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twistlab: twisted Hilbert space norm laboratory"};
  app.set_version_flag("--version", twistlab::kVersion);
  app.require_subcommand(1);

  std::string configPath, outPath, format = "json", vectorText, space, omegaText, nsText;
  std::uint64_t seed = 1;
  int capDim = 8, nParam = 0, dim = 0, samples = 0, targetDim = 0, mParam = 0, sectionM = 0;
  double tolerance = 1e-9, pParam = 0.0;

  app.add_option("--config", configPath, "JSON config file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", outPath, "output report path");
  app.add_option("--format", format, "json | csv");
  app.add_option("--cap-dim", capDim, "norming-set cap override");
  app.add_option("--tolerance", tolerance, "certification tolerance");

  struct Sub {
    CLI::App* cmd;
    std::string kind;
  };
  std::vector<Sub> subs;
  auto addSub = [&](const std::string& kind, const std::string& desc) {
    CLI::App* c = app.add_subcommand(kind, desc);
    c->fallthrough();  // global flags (--seed, --out, ...) after the subcommand
    c->add_option("--vector", vectorText, "sparse vector idx:value,...");
    c->add_option("--space", space, "space name");
    c->add_option("--omega", omegaText, "centralizer shortcut or JSON");
    c->add_option("--p", pParam, "convexification exponent");
    c->add_option("--n", nParam, "size parameter n");
    c->add_option("--ns", nsText, "comma-separated n list");
    c->add_option("--dim", dim, "coordinate dimension");
    c->add_option("--samples", samples, "sample count");
    c->add_option("--target-dim", targetDim, "compression target dimension");
    c->add_option("--m", mParam, "iterated-log order m");
    c->add_option("--section", sectionM, "section size M (in v-indices)");
    subs.push_back({c, kind});
    return c;
  };
  addSub("norm", "Tsirelson-type norm of a vector");
  addSub("dual", "dual norm of a vector");
  addSub("centralizer", "evaluate a centralizer map");
  addSub("delta", "empirical Delta(Omega) estimate");
  addSub("duality", "duality bound check and witnesses");
  addSub("dn", "successive-block parameter D_n");
  addSub("growth", "Omega growth probe over 1_n");
  addSub("commutator", "commutator gap over successive blocks");
  addSub("jl", "Johnson-Lindenstrauss compression harness");
  addSub("lsd", "self-dual enlargement F_m of random subspaces");

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  for (const auto& s : subs) {
    if (s.cmd->parsed()) cfg.kind = s.kind;
  }

  try {
    if (!configPath.empty()) {
      std::ifstream in(configPath);
      if (!in) throw ConfigError("--config: cannot open " + configPath);
      json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("--config: invalid JSON: ") + e.what());
      }
      if (j.contains("kind") && cfg.kind.empty()) cfg.kind = j["kind"].get<std::string>();
      if (j.contains("params")) cfg.params = j["params"];
      if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("format")) cfg.format = j["format"].get<std::string>();
      if (j.contains("capDim")) cfg.capDim = j["capDim"].get<int>();
      if (j.contains("tolerance")) cfg.tolerance = j["tolerance"].get<double>();
      if (j.contains("outputPath")) cfg.outputPath = j["outputPath"].get<std::string>();
    }
    // flag overrides
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--format")) cfg.format = format;
    if (app.count("--cap-dim")) cfg.capDim = capDim;
    if (app.count("--tolerance")) cfg.tolerance = tolerance;
    if (app.count("--out")) cfg.outputPath = outPath;

    if (!vectorText.empty()) cfg.params["vector"] = parseInlineVector(vectorText);
    if (!space.empty()) cfg.params["space"] = space;
    if (!omegaText.empty()) {
      if (!omegaText.empty() && omegaText.front() == '{') {
        cfg.params["omega"] = json::parse(omegaText);
      } else {
        cfg.params["omega"] = omegaText;
      }
    }
    if (pParam > 0) cfg.params["p"] = pParam;
    if (nParam > 0) cfg.params["n"] = nParam;
    if (!nsText.empty()) cfg.params["ns"] = parseIntList(nsText);
    if (dim > 0) cfg.params["dim"] = dim;
    if (samples > 0) cfg.params["samples"] = samples;
    if (targetDim > 0) cfg.params["targetDim"] = targetDim;
    if (mParam > 0) cfg.params["m"] = mParam;
    if (sectionM > 0) cfg.params["M"] = sectionM;

    // exact-mode norm runs go through the memo cache when configured
    const std::string cacheDir = twistlab::cache::defaultCacheDir();
    std::optional<twistlab::cache::TsirelsonCache> cache;
    std::string cacheKey;
    if (!cacheDir.empty() && cfg.kind == "norm" &&
        cfg.params.value("mode", "exact") == "exact" && cfg.params.contains("vector")) {
      cache.emplace(cacheDir);
      cacheKey = twistlab::cache::TsirelsonCache::keyFor(
          twistlab::report::qvecFromJson(cfg.params["vector"]),
          cfg.params.value("space", "T"));
    }

    twistlab::report::ExperimentReport rep;
    const auto hit = cache ? cache->lookup(cacheKey) : std::nullopt;
    if (hit) {
      // serve the memoized exact value without re-running the DP
      rep = twistlab::report::synthesizeNormRowFromCache(cfg, *hit);
      rep.rows.front()["cache"] = "hit";
    } else {
      rep = twistlab::report::run(cfg);
      if (cache) {
        const auto& row = rep.rows.front();
        const std::string exact = row.contains("exact")
                                      ? row["exact"].get<std::string>()
                                      : row.value("exact_squared", std::string());
        if (!exact.empty()) {
          cache->store(cacheKey, exact);
          cache->save();
          rep.rows.front()["cache"] = "miss";
        }
      }
    }

    if (!cfg.outputPath.empty()) {
      twistlab::report::writeReport(rep, cfg.outputPath, cfg.format);
    } else {
      std::cout << (cfg.format == "csv" ? twistlab::report::reportCsvText(rep)
                                        : twistlab::report::reportJsonText(rep));
    }
    if (rep.exitCode != 0) {
      std::cerr << "twistlab: flagged violation in report rows" << std::endl;
      return rep.exitCode;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "twistlab: config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "twistlab: error: " << e.what() << std::endl;
    return 1;
  }
}
