#pragma once

#include <string>

#include "lfgp/gp.hpp"

namespace lfgp {

/// Serialized model: a single versioned JSON document. Every real is stored
/// as a C hex-float string, so save/load round-trips are bit-exact.
std::string model_to_string(const LfgpModel& model);
LfgpModel model_from_string(const std::string& text);

void save_model(const LfgpModel& model, const std::string& path);
LfgpModel load_model(const std::string& path);

/// Hex-float helpers shared with the tests.
std::string double_to_hex(double v);
double hex_to_double(const std::string& s);

} // namespace lfgp
