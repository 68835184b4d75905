#pragma once

#include "horizon/market_model.hpp"

namespace fixtures {

inline horizon::ModelParams perpetual_case() { return horizon::ModelParams::perpetual(0.02, 0.3, 0.5, 4.0); }
inline horizon::ModelParams finite_case() { return horizon::ModelParams::finite(0.02, 0.3, 0.4, 5.0, 10.0); }

}  // namespace fixtures
