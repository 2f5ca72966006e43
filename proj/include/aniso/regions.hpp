#pragma once

#include "aniso/geometry.hpp"

#include <json.hpp>

#include <string>

namespace aniso {

// Closed catalog of analytic region predicates, composable through JSON:
//   cone_iso(c):    c|x| <= |xi|
//   cone_aniso(c):  c x^2 <= |xi|
//   type_region(c): <xi> <= c <x>^sigma      (sigma from the aniso params)
//   dual_type_region(c): <x>^sigma <= c <xi>
//   halfplane(axis, min): axis coordinate >= min
//   annulus(r0, r1): r0 <= |z| < r1
//   box_aniso(cx, cxi, rx, rxi): |x-cx| < rx and |xi-cxi| < rxi
//   all, complement(arg), union(args), intersection(args)
std::function<bool(PhasePoint)> region_predicate(const nlohmann::json& spec,
                                                 const AnisoParams& params);

RegionMask build_region(const nlohmann::json& spec, const AnisoParams& params,
                        const PhaseGrid& grid);

std::string region_spec_name(const nlohmann::json& spec);

} // namespace aniso
