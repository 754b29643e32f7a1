#pragma once

// JSON forms of reports and verdicts; parse(serialize(v)) == v exactly.
// Non-finite doubles are written as the strings "inf", "-inf" and "nan".

#include <string>
#include <string_view>

#include <json.hpp>

#include "gapcert/verdict.hpp"

namespace gapcert {

nlohmann::json to_json_value(const TheoremVerdict& v);
nlohmann::json to_json_value(const GapReport& g);
nlohmann::json to_json_value(const CycleInfo& c);
nlohmann::json to_json_value(const Equilibrium& e);

TheoremVerdict verdict_from_json(const nlohmann::json& j);
GapReport gap_report_from_json(const nlohmann::json& j);
CycleInfo cycle_from_json(const nlohmann::json& j);

std::string verdict_to_json(const TheoremVerdict& v);
TheoremVerdict verdict_from_text(std::string_view text);

/// t, x1..xn per orbit sample, RFC 4180 with CRLF.
std::string orbit_csv(const CycleInfo& c);

}  // namespace gapcert
