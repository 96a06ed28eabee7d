#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fermitele/protocols.hpp"
#include "fermitele/scenario.hpp"

namespace fermitele {

using Json = nlohmann::ordered_json;

Json report_json(const RunReport& report);

/// Built-in protocol report; `checks` become the "assertions" array.
Json report_json(const ProtocolReport& report, std::uint64_t seed, const std::vector<AssertionOutcome>& checks,
                 std::optional<double> timing_ms);

/// Pretty JSON with every floating-point number printed as %.17g.
std::string dump_json(const Json& value);

/// One "path,value" row per leaf, same number formatting as dump_json.
std::string dump_csv(const Json& value);

}  // namespace fermitele
