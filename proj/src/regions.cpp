#include "aniso/regions.hpp"

#include <cmath>
#include <stdexcept>

namespace aniso {

namespace {

double bracket(double v) { return std::sqrt(1.0 + v * v); }

} // namespace

std::function<bool(PhasePoint)> region_predicate(const nlohmann::json& spec,
                                                 const AnisoParams& params) {
    const std::string type = spec.at("type").get<std::string>();
    if (type == "all") return [](PhasePoint) { return true; };
    if (type == "cone_iso") {
        const double c = spec.at("c").get<double>();
        return [c](PhasePoint z) { return c * std::abs(z.x) <= std::abs(z.xi); };
    }
    if (type == "cone_aniso") {
        const double c = spec.at("c").get<double>();
        return [c](PhasePoint z) { return c * z.x * z.x <= std::abs(z.xi); };
    }
    if (type == "type_region") {
        const double c = spec.at("c").get<double>();
        const double sigma = params.sigma();
        return [c, sigma](PhasePoint z) {
            return bracket(z.xi) <= c * std::pow(bracket(z.x), sigma);
        };
    }
    if (type == "dual_type_region") {
        const double c = spec.at("c").get<double>();
        const double sigma = params.sigma();
        return [c, sigma](PhasePoint z) {
            return std::pow(bracket(z.x), sigma) <= c * bracket(z.xi);
        };
    }
    if (type == "halfplane") {
        const std::string axis = spec.at("axis").get<std::string>();
        const double lo = spec.at("min").get<double>();
        if (axis == "x") return [lo](PhasePoint z) { return z.x >= lo; };
        if (axis == "xi") return [lo](PhasePoint z) { return z.xi >= lo; };
        throw std::invalid_argument("halfplane axis must be x or xi");
    }
    if (type == "annulus") {
        const double r0 = spec.at("r0").get<double>();
        const double r1 = spec.at("r1").get<double>();
        return [r0, r1](PhasePoint z) {
            const double r = std::hypot(z.x, z.xi);
            return r >= r0 && r < r1;
        };
    }
    if (type == "box_aniso") {
        const double cx = spec.at("cx").get<double>();
        const double cxi = spec.at("cxi").get<double>();
        const double rx = spec.at("rx").get<double>();
        const double rxi = spec.at("rxi").get<double>();
        return [=](PhasePoint z) {
            return std::abs(z.x - cx) < rx && std::abs(z.xi - cxi) < rxi;
        };
    }
    if (type == "complement") {
        auto inner = region_predicate(spec.at("arg"), params);
        return [inner](PhasePoint z) { return !inner(z); };
    }
    if (type == "union" || type == "intersection") {
        std::vector<std::function<bool(PhasePoint)>> parts;
        for (const auto& sub : spec.at("args")) parts.push_back(region_predicate(sub, params));
        const bool want_union = type == "union";
        return [parts, want_union](PhasePoint z) {
            for (const auto& f : parts) {
                if (want_union && f(z)) return true;
                if (!want_union && !f(z)) return false;
            }
            return !want_union;
        };
    }
    throw std::invalid_argument("unknown region type: " + type);
}

RegionMask build_region(const nlohmann::json& spec, const AnisoParams& params,
                        const PhaseGrid& grid) {
    return rasterize(grid, region_predicate(spec, params));
}

std::string region_spec_name(const nlohmann::json& spec) {
    const std::string type = spec.at("type").get<std::string>();
    if (spec.contains("name")) return spec.at("name").get<std::string>();
    if (type == "complement") return "complement_" + region_spec_name(spec.at("arg"));
    return type;
}

} // namespace aniso
