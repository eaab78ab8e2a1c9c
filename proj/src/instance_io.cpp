#include "fedcmab/instance_io.hpp"

#include <fstream>

namespace fedcmab {

nlohmann::json spec_to_json(const InstanceSpec& spec) {
  return {{"distribution", to_string(spec.distribution)},
          {"mean", spec.mean},
          {"stddev", spec.stddev},
          {"k_lo", spec.k_lo},
          {"k_hi", spec.k_hi}};
}

InstanceSpec spec_from_json(const nlohmann::json& doc) {
  InstanceSpec spec;
  spec.distribution = distribution_from_string(doc.value("distribution", "uniform"));
  spec.mean = doc.value("mean", spec.mean);
  spec.stddev = doc.value("stddev", spec.stddev);
  spec.k_lo = doc.value("k_lo", spec.k_lo);
  spec.k_hi = doc.value("k_hi", spec.k_hi);
  spec.seed = doc.value("seed", spec.seed);
  return spec;
}

nlohmann::json instance_to_json(const ProblemInstance& inst) {
  const InstanceData d = inst.data();
  return {{"m", inst.producers()},
          {"n", inst.agents()},
          {"T", inst.horizon()},
          {"rho", d.rho},
          {"alpha", d.alpha},
          {"gamma", d.gamma},
          {"q", d.quality},
          {"c", d.cost},
          {"k", d.capacity},
          {"seed", d.spec.seed},
          {"spec", spec_to_json(d.spec)}};
}

ProblemInstance instance_from_json(const nlohmann::json& doc) {
  try {
    InstanceData d;
    d.quality = doc.at("q").get<std::vector<double>>();
    d.cost = doc.at("c").get<std::vector<std::vector<double>>>();
    d.capacity = doc.at("k").get<std::vector<std::vector<int>>>();
    d.rho = doc.at("rho").get<double>();
    d.alpha = doc.at("alpha").get<double>();
    d.gamma = doc.at("gamma").get<double>();
    d.horizon = doc.at("T").get<std::int64_t>();
    d.spec = spec_from_json(doc.at("spec"));
    d.spec.seed = doc.at("seed").get<std::uint64_t>();
    ProblemInstance inst(std::move(d));
    if (inst.producers() != doc.at("m").get<int>() || inst.agents() != doc.at("n").get<int>()) {
      throw ConfigError("instance document: m/n disagree with matrix shapes");
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance document: ") + e.what());
  }
}

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << instance_to_json(inst).dump(2) << '\n';
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  return instance_from_json(doc);
}

}  // namespace fedcmab
