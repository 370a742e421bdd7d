#pragma once

#include "pinchlab/profiles.hpp"
#include "pinchlab/report_io.hpp"

namespace pinchlab {

Json profile_to_json(const RadialProfile& profile);
RadialProfile profile_from_json(const Json& doc);

// {"n", "topology", "L", "potential_scale", "phi", "f", "meta"}; "L" is the
// doubling point of a doubled sphere and the evaluation range of a cap.
Json manifold_to_json(const ManifoldWithDensity& m);
ManifoldWithDensity manifold_from_json(const Json& doc);

}  // namespace pinchlab
