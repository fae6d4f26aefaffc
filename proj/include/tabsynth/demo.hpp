#pragma once

#include <cstdint>

#include "tabsynth/schema.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// Seven categorical attributes shaped like a census extract (workclass,
// education, marital status, occupation, relationship, ethnicity, gender)
// with a binary income label. gender is the sensitive column, Female
// unprivileged.
Schema census_demo_schema();

// Deterministic sampler over the demo schema. Income depends on education,
// occupation, marital status and gender, so the label is learnable and the
// groups have distinct positive rates (roughly 0.2 for Female vs 0.33 for
// Male at the defaults).
Dataset generate_census_demo(Index rows, std::uint64_t seed);

}  // namespace tabsynth
