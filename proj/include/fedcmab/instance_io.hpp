#pragma once

#include <filesystem>

#include "fedcmab/domain.hpp"
#include "json.hpp"

namespace fedcmab {

/// {m, n, T, rho, alpha, gamma, q, c, k, seed, spec}; c and k are m x n.
nlohmann::json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& doc);

nlohmann::json spec_to_json(const InstanceSpec& spec);
InstanceSpec spec_from_json(const nlohmann::json& doc);

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

}  // namespace fedcmab
