#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "loopsoup/brownian.hpp"
#include "loopsoup/loop_measure.hpp"
#include "loopsoup/occupation.hpp"
#include "loopsoup/soup_sampler.hpp"

namespace loopsoup {

inline constexpr int kFormatVersion = 1;

// {"format": "loopsoup-soup", "version", "domain", "mass", "lambda", "maxlen",
//  "seed", "replica", "killing": [...], "loops": [{"cycle": [[x,y],...], "mark", "id"}]}
nlohmann::json soup_to_json(const LoopSoupRealization& soup, const std::string& domain_spec,
                            const std::string& mass_spec);
LoopSoupRealization soup_from_json(const nlohmann::json& j);

// [{"cycle": [[x,y],...], "weight": w}, ...] under {"format": "loopsoup-loops", "version", "loops"}.
nlohmann::json loops_to_json(const std::vector<WeightedLoop>& loops);

nlohmann::json brownian_soup_to_json(const BrownianSoup& soup, const BrownianSoupConfig& config);

// CSV with header "x,y,L".
void write_field_csv(std::ostream& out, const LatticeDomain& domain, const OccupationField& field);
// Replica-stacked little-endian doubles: magic "LSF1", uint64 replicas, uint64 sites, then values.
void write_fields_binary(std::ostream& out, const std::vector<OccupationField>& fields);
std::vector<OccupationField> read_fields_binary(std::istream& in);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace loopsoup
