#ifndef QNL_SERIALIZE_HPP
#define QNL_SERIALIZE_HPP

#include "qnl/limits.hpp"
#include "qnl/minimize.hpp"

#include <json.hpp>

#include <string>

namespace qnl {

using json = nlohmann::ordered_json;

json toJson(const CheckReport& report);
json toJson(const PotentialSpec& spec);
json toJson(const PotentialAnalysis& analysis);
json toJson(const BLResult& r);
json toJson(const LimitTable& t);
json toJson(const EnergyBreakdown& b);
json toJson(const CrackReport& r);
json toJson(const MinimizeResult& r, bool includeDeformation = true);
json toJson(const JumpSpec& s);

/// index,position rows; fixed %.17g formatting for reproducible bytes.
std::string deformationCsv(const Vector& u);

std::string formatDouble(double v);

}  // namespace qnl

#endif
