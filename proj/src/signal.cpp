#include "aniso/signal.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace aniso {

namespace {

constexpr double pi = 3.14159265358979323846;

double edge_leakage(const SampledSignal& u) {
    if (u.values.empty()) return 0.0;
    const double edge = std::max(std::abs(u.values.front()), std::abs(u.values.back()));
    return edge * edge * 2.0 * u.grid.x_max;
}

struct Sampler {
    // value of the catalog signal at x, analytic
    const CatalogKind& kind;
    cplx operator()(double x) const {
        if (std::holds_alternative<GaussianSpec>(kind)) {
            const double w = std::get<GaussianSpec>(kind).width;
            if (!(w > 0.0)) throw std::invalid_argument("gaussian width must be positive");
            return std::pow(pi * w * w, -0.25) * std::exp(-x * x / (2.0 * w * w));
        }
        if (std::holds_alternative<HermiteSpec>(kind)) {
            const int ord = std::get<HermiteSpec>(kind).order;
            if (ord < 0) throw std::invalid_argument("hermite order must be nonnegative");
            return hermite_functions(x, ord + 1).back();
        }
        if (std::holds_alternative<DeltaApproxSpec>(kind)) {
            const double w = std::get<DeltaApproxSpec>(kind).width;
            if (!(w > 0.0)) throw std::invalid_argument("delta width must be positive");
            return std::exp(-x * x / (2.0 * w * w)) / (w * std::sqrt(2.0 * pi));
        }
        if (std::holds_alternative<ConstantSpec>(kind)) return cplx(1.0, 0.0);
        const double rate = std::get<ChirpSpec>(kind).rate;
        return std::pow(pi, -0.25) *
               std::exp(cplx(-x * x / 2.0, rate * x * x / 2.0));
    }
};

std::string kind_label(const CatalogKind& kind) {
    if (std::holds_alternative<GaussianSpec>(kind)) return "gaussian";
    if (std::holds_alternative<HermiteSpec>(kind))
        return "hermite" + std::to_string(std::get<HermiteSpec>(kind).order);
    if (std::holds_alternative<DeltaApproxSpec>(kind)) return "delta_approx";
    if (std::holds_alternative<ConstantSpec>(kind)) return "constant";
    return "chirp";
}

bool truncation_exempt(const CatalogKind& kind) {
    return std::holds_alternative<ConstantSpec>(kind) ||
           std::holds_alternative<DeltaApproxSpec>(kind);
}

} // namespace

SpatialGrid::SpatialGrid(double xm, int n_) : x_max(xm), n(n_) {
    if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
    if (n < 16) throw std::invalid_argument("spatial grid needs at least 16 samples");
}

double SampledSignal::l2_norm() const {
    double s = 0.0;
    for (const cplx& v : values) s += std::norm(v);
    return std::sqrt(s * grid.h());
}

double SampledSignal::l1_norm() const {
    double s = 0.0;
    for (const cplx& v : values) s += std::abs(v);
    return s * grid.h();
}

std::vector<double> hermite_functions(double x, int count) {
    std::vector<double> h(count, 0.0);
    if (count <= 0) return h;
    h[0] = std::pow(pi, -0.25) * std::exp(-x * x / 2.0);
    if (count == 1) return h;
    h[1] = std::sqrt(2.0) * x * h[0];
    for (int j = 1; j + 1 < count; ++j)
        h[j + 1] = std::sqrt(2.0 / (j + 1.0)) * x * h[j] - std::sqrt(j / (j + 1.0)) * h[j - 1];
    return h;
}

SampledSignal make_catalog_signal(const CatalogKind& kind, const SpatialGrid& grid) {
    SampledSignal u;
    u.grid = grid;
    u.label = kind_label(kind);
    u.values.resize(grid.n);
    Sampler s{kind};
    for (int k = 0; k < grid.n; ++k) u.values[k] = s(grid.point(k));
    if (!truncation_exempt(kind) && edge_leakage(u) > 1e-10)
        throw std::invalid_argument("grid truncation");
    return u;
}

SampledSignal make_dilated_catalog_signal(const CatalogKind& kind, double A,
                                          const SpatialGrid& grid) {
    if (A == 0.0) throw std::invalid_argument("dilation factor must be nonzero");
    SampledSignal u;
    u.grid = grid;
    u.label = kind_label(kind) + "_dil";
    u.values.resize(grid.n);
    Sampler s{kind};
    const double amp = std::sqrt(std::abs(A));
    for (int k = 0; k < grid.n; ++k) u.values[k] = amp * s(A * grid.point(k));
    return u;
}

SampledSignal zero_signal(const SpatialGrid& grid) {
    SampledSignal u;
    u.grid = grid;
    u.label = "zero";
    u.values.assign(grid.n, cplx(0.0, 0.0));
    return u;
}

SampledSignal scaled(const SampledSignal& u, cplx factor) {
    SampledSignal r = u;
    for (cplx& v : r.values) v *= factor;
    return r;
}

SampledSignal subtract(const SampledSignal& a, const SampledSignal& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("signal grids differ");
    SampledSignal r = a;
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
    return r;
}

void save_signal_csv(const SampledSignal& u, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,re,im\n";
    char buf[128];
    for (int k = 0; k < u.grid.n; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", u.grid.point(k),
                      u.values[k].real(), u.values[k].imag());
        out << buf;
    }
}

void save_signal_json(const SampledSignal& u, const std::string& path) {
    nlohmann::json j;
    j["label"] = u.label;
    j["grid"] = {{"x_max", u.grid.x_max}, {"n", u.grid.n}};
    std::vector<double> re(u.values.size()), im(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        re[i] = u.values[i].real();
        im[i] = u.values[i].imag();
    }
    j["re"] = re;
    j["im"] = im;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump() << "\n";
}

SampledSignal load_signal_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    SampledSignal u;
    u.label = j.at("label").get<std::string>();
    u.grid = SpatialGrid(j.at("grid").at("x_max").get<double>(), j.at("grid").at("n").get<int>());
    auto re = j.at("re").get<std::vector<double>>();
    auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != static_cast<std::size_t>(u.grid.n) || im.size() != re.size())
        throw std::runtime_error("signal json length mismatch");
    u.values.resize(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) u.values[i] = cplx(re[i], im[i]);
    return u;
}

} // namespace aniso
