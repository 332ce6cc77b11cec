#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vin/dataset.hpp"
#include "vin/model.hpp"

namespace vin {

/// Normalized permutation impacts of every input of one model on one data
/// partition. Impacts lie in [0,1]; the strongest input has impact 1 unless
/// all raw error increases are zero.
struct ImpactVector {
    struct Entry {
        std::string input;
        double impact = 0.0;  ///< raw increase divided by the largest raw increase
        double raw = 0.0;     ///< mean NMSE increase under permutation, floored at 0
    };
    std::string target;
    std::vector<Entry> entries;  ///< one per model input, spec order
};

/// Mean NMSE increase over `repeats` seeded shuffles of one input column,
/// floored at 0. Deterministic for a fixed seed.
double raw_impact(const Model& model, const Dataset& ds, std::string_view var, int repeats,
                  std::uint64_t seed);

/// Raw impacts for every input (seeded per input from `seed`), normalized by
/// the maximum raw impact; all zero when no permutation increases the error.
ImpactVector impact_vector(const Model& model, const Dataset& ds, int repeats,
                           std::uint64_t seed);

/// CSV rows: target,input,impact,raw_increase.
void save_impacts_csv(std::span<const ImpactVector> impacts,
                      const std::filesystem::path& path);

} // namespace vin
