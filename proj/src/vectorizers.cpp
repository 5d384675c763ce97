#include "tdac/vectorizers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tdac/errors.hpp"

namespace tdac {

namespace {

constexpr double kHalfSqrt2 = std::numbers::sqrt2 / 2.0;

const std::vector<PersistencePair>& bars(const PersistenceDiagram& pd, int k) {
    if (k < 0 || k > PersistenceDiagram::kMaxDim) throw ParameterError(fmt::format("homology dimension {} not available", k));
    return pd[k];
}

void require_finite(const std::vector<PersistencePair>& d, const char* who) {
    for (const auto& p : d)
        if (p.essential()) throw ParameterError(fmt::format("{}: diagram must be finitized first", who));
}

double gaussian(double dx, double dy, double sigma) {
    return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) / (2.0 * std::numbers::pi * sigma * sigma);
}

const char* vectorizer_name(VectorizerKind k) {
    switch (k) {
        case VectorizerKind::Entropy: return "entropy";
        case VectorizerKind::AmplitudeL1: return "amplitude_l1";
        case VectorizerKind::AmplitudeL2: return "amplitude_l2";
        case VectorizerKind::Wasserstein: return "wasserstein";
        case VectorizerKind::Bottleneck: return "bottleneck";
        case VectorizerKind::BettiCurve: return "betti";
        case VectorizerKind::HeatKernel: return "heat";
    }
    return "?";
}

std::string vectorizer_id(const VectorizerSpec& v) {
    switch (v.kind) {
        case VectorizerKind::Wasserstein: return fmt::format("wasserstein(p={:g})", v.p);
        case VectorizerKind::BettiCurve: return fmt::format("betti(n={})", v.n_samples);
        case VectorizerKind::HeatKernel: return fmt::format("heat(sigma={:g};r={})", v.sigma, v.resolution);
        default: return vectorizer_name(v.kind);
    }
}

Center resolve_center(const RadialFiltration& r, const BinaryImage& img) {
    if (r.center) return *r.center;
    return Center{static_cast<std::int64_t>(img.width / 2), static_cast<std::int64_t>(img.height / 2)};
}

}  // namespace

double HeatGrid::l2_norm() const {
    if (resolution < 2) return 0.0;
    double step = (range.max - range.min) / static_cast<double>(resolution - 1);
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc * step * step);
}

double persistence_entropy(const PersistenceDiagram& pd, int k) {
    const auto& d = bars(pd, k);
    require_finite(d, "persistence_entropy");
    double total = 0.0;
    for (const auto& p : d) total += p.persistence();
    if (!(total > 0.0)) return 0.0;
    double h = 0.0;
    for (const auto& p : d) {
        double r = p.persistence() / total;
        if (r > 0.0) h -= r * std::log(r);
    }
    return h;
}

BettiCurve betti_curve(const PersistenceDiagram& pd, int k, std::size_t n_samples, Range range) {
    const auto& d = bars(pd, k);
    if (n_samples < 2) throw ParameterError("betti_curve: need at least 2 samples");
    if (!(range.min < range.max)) throw ParameterError("betti_curve: degenerate range");
    BettiCurve curve{range, std::vector<double>(n_samples, 0.0)};
    double step = (range.max - range.min) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        double t = i + 1 == n_samples ? range.max : range.min + step * static_cast<double>(i);
        std::size_t alive = 0;
        for (const auto& p : d)
            if (p.birth <= t && t < p.death) ++alive;
        curve.samples[i] = static_cast<double>(alive);
    }
    return curve;
}

HeatGrid heat_kernel(const PersistenceDiagram& pd, int k, double sigma, std::size_t resolution,
                     std::optional<Range> range) {
    const auto& d = bars(pd, k);
    require_finite(d, "heat_kernel");
    if (!(sigma > 0.0)) throw ParameterError("heat_kernel: sigma must be positive");
    if (resolution < 2) throw ParameterError("heat_kernel: resolution must be >= 2");
    if (!range) {
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& p : d) {
            double a = std::min(p.birth, p.death), b = std::max(p.birth, p.death);
            lo = any ? std::min(lo, a) : a;
            hi = any ? std::max(hi, b) : b;
            any = true;
        }
        range = Range{lo - 3.0 * sigma, hi + 3.0 * sigma};
    }
    HeatGrid g{*range, sigma, resolution, std::vector<double>(resolution * resolution, 0.0)};
    std::vector<double> axis(resolution);
    double step = (range->max - range->min) / static_cast<double>(resolution - 1);
    for (std::size_t i = 0; i < resolution; ++i) axis[i] = range->min + step * static_cast<double>(i);
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            double acc = 0.0;
            for (const auto& p : d)
                acc += gaussian(axis[ix] - p.birth, axis[iy] - p.death, sigma) -
                       gaussian(axis[ix] - p.death, axis[iy] - p.birth, sigma);
            g.values[iy * resolution + ix] = acc;
        }
    }
    return g;
}

double wasserstein_amplitude(const PersistenceDiagram& pd, int k, double p) {
    if (!(p >= 1.0)) throw ParameterError("wasserstein_amplitude: p must be >= 1");
    const auto& d = bars(pd, k);
    require_finite(d, "wasserstein_amplitude");
    double acc = 0.0;
    for (const auto& bar : d) acc += std::pow(bar.persistence(), p);
    return kHalfSqrt2 * std::pow(acc, 1.0 / p);
}

double bottleneck_amplitude(const PersistenceDiagram& pd, int k) {
    const auto& d = bars(pd, k);
    require_finite(d, "bottleneck_amplitude");
    double m = 0.0;
    for (const auto& bar : d) m = std::max(m, bar.persistence());
    return kHalfSqrt2 * m;
}

double lp_amplitude(const PersistenceDiagram& pd, int k, LpNorm norm) {
    const auto& d = bars(pd, k);
    require_finite(d, "lp_amplitude");
    double acc = 0.0;
    for (const auto& bar : d) {
        double l = bar.persistence();
        acc += norm == LpNorm::L1 ? l : l * l;
    }
    return kHalfSqrt2 * (norm == LpNorm::L1 ? acc : std::sqrt(acc));
}

// ---------------------------------------------------------------------------

std::string filtration_id(const FiltrationSpec& f) {
    if (auto h = std::get_if<HeightFiltration>(&f)) return fmt::format("height({:g};{:g})", h->dx, h->dy);
    const auto& r = std::get<RadialFiltration>(f);
    if (r.center) return fmt::format("radial({};{})", r.center->x, r.center->y);
    return "radial(mid)";
}

FeatureSchema::FeatureSchema(std::vector<FiltrationSpec> filtrations, std::vector<int> dims,
                             std::vector<VectorizerSpec> vectorizers)
    : filtrations_(std::move(filtrations)), dims_(std::move(dims)), vectorizers_(std::move(vectorizers)) {
    for (int k : dims_)
        if (k < 0 || k > PersistenceDiagram::kMaxDim) throw ConfigError(fmt::format("schema: homology dimension {} not supported", k));
    for (const auto& f : filtrations_)
        if (auto h = std::get_if<HeightFiltration>(&f)) {
            try {
                Direction(h->dx, h->dy);
            } catch (const ParameterError& e) {
                throw ConfigError(fmt::format("schema: {}", e.what()));
            }
        }
    for (const auto& v : vectorizers_) {
        if (v.kind == VectorizerKind::Wasserstein && !(v.p >= 1.0)) throw ConfigError("schema: wasserstein p must be >= 1");
        if (v.kind == VectorizerKind::BettiCurve && v.n_samples < 2) throw ConfigError("schema: betti n_samples must be >= 2");
        if (v.kind == VectorizerKind::HeatKernel && (!(v.sigma > 0.0) || v.resolution < 2))
            throw ConfigError("schema: heat kernel needs sigma > 0 and resolution >= 2");
    }
    for (std::size_t fi = 0; fi < filtrations_.size(); ++fi) {
        for (int k : dims_) {
            for (std::size_t vi = 0; vi < vectorizers_.size(); ++vi) {
                for (std::size_t c = 0; c < vectorizers_[vi].width(); ++c) {
                    columns_.push_back({fi, k, vi, c,
                                        fmt::format("{}/H{}/{}/{}", filtration_id(filtrations_[fi]), k,
                                                    vectorizer_id(vectorizers_[vi]), c)});
                }
            }
        }
    }
}

FeatureSchema FeatureSchema::default_schema() {
    return FeatureSchema({HeightFiltration{-1.0, 1.0}, RadialFiltration{}}, {0, 1}, {VectorizerSpec{}});
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw ConfigError("schema: expected an object");
        for (const auto& [key, _] : j.items())
            if (key != "filtrations" && key != "dims" && key != "vectorizers")
                throw ConfigError(fmt::format("schema: unknown key '{}'", key));
        std::vector<FiltrationSpec> filtrations;
        for (const auto& f : j.at("filtrations")) {
            auto type = f.at("type").get<std::string>();
            if (type == "height") {
                auto d = f.value("direction", std::vector<double>{-1.0, 1.0});
                if (d.size() != 2) throw ConfigError("schema: height direction needs 2 components");
                filtrations.emplace_back(HeightFiltration{d[0], d[1]});
            } else if (type == "radial") {
                RadialFiltration r;
                if (f.contains("center")) {
                    auto c = f.at("center").get<std::vector<std::int64_t>>();
                    if (c.size() != 2) throw ConfigError("schema: radial center needs 2 coordinates");
                    r.center = Center{c[0], c[1]};
                }
                filtrations.emplace_back(r);
            } else {
                throw ConfigError(fmt::format("schema: unknown filtration '{}'", type));
            }
        }
        auto dims = j.value("dims", std::vector<int>{0, 1});
        std::vector<VectorizerSpec> vectorizers;
        for (const auto& v : j.at("vectorizers")) {
            auto type = v.at("type").get<std::string>();
            VectorizerSpec spec;
            if (type == "entropy") spec.kind = VectorizerKind::Entropy;
            else if (type == "amplitude_l1") spec.kind = VectorizerKind::AmplitudeL1;
            else if (type == "amplitude_l2") spec.kind = VectorizerKind::AmplitudeL2;
            else if (type == "wasserstein") {
                spec.kind = VectorizerKind::Wasserstein;
                spec.p = v.value("p", 2.0);
            } else if (type == "bottleneck") spec.kind = VectorizerKind::Bottleneck;
            else if (type == "betti") {
                spec.kind = VectorizerKind::BettiCurve;
                spec.n_samples = v.value("n_samples", std::size_t{16});
            } else if (type == "heat") {
                spec.kind = VectorizerKind::HeatKernel;
                spec.sigma = v.value("sigma", 0.5);
                spec.resolution = v.value("resolution", std::size_t{32});
            } else {
                throw ConfigError(fmt::format("schema: unknown vectorizer '{}'", type));
            }
            vectorizers.push_back(spec);
        }
        return FeatureSchema(std::move(filtrations), std::move(dims), std::move(vectorizers));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("schema: {}", e.what()));
    }
}

nlohmann::ordered_json FeatureSchema::to_json() const {
    nlohmann::ordered_json j;
    j["filtrations"] = nlohmann::ordered_json::array();
    for (const auto& f : filtrations_) {
        if (auto h = std::get_if<HeightFiltration>(&f)) {
            j["filtrations"].push_back({{"type", "height"}, {"direction", {h->dx, h->dy}}});
        } else {
            const auto& r = std::get<RadialFiltration>(f);
            nlohmann::ordered_json e{{"type", "radial"}};
            if (r.center) e["center"] = {r.center->x, r.center->y};
            j["filtrations"].push_back(e);
        }
    }
    j["dims"] = dims_;
    j["vectorizers"] = nlohmann::ordered_json::array();
    for (const auto& v : vectorizers_) {
        nlohmann::ordered_json e{{"type", vectorizer_name(v.kind)}};
        if (v.kind == VectorizerKind::Wasserstein) e["p"] = v.p;
        if (v.kind == VectorizerKind::BettiCurve) e["n_samples"] = v.n_samples;
        if (v.kind == VectorizerKind::HeatKernel) {
            e["sigma"] = v.sigma;
            e["resolution"] = v.resolution;
        }
        j["vectorizers"].push_back(e);
    }
    return j;
}

GrayImage apply_filtration(const BinaryImage& img, const FiltrationSpec& f) {
    if (auto h = std::get_if<HeightFiltration>(&f)) return height_filtration(img, Direction(h->dx, h->dy));
    return radial_filtration(img, resolve_center(std::get<RadialFiltration>(f), img));
}

PersistenceDiagram filtered_diagram(const BinaryImage& img, const FiltrationSpec& f) {
    auto cx = build_cubical_filtration(apply_filtration(img, f));
    auto pd = compute_persistence(cx);
    if (cx.empty()) return pd;
    return finitize(pd, cx.max_value());
}

void vectorize_into(const PersistenceDiagram& pd, int dim, const VectorizerSpec& v, const Range& value_range,
                    std::vector<double>& out) {
    switch (v.kind) {
        case VectorizerKind::Entropy: out.push_back(persistence_entropy(pd, dim)); break;
        case VectorizerKind::AmplitudeL1: out.push_back(lp_amplitude(pd, dim, LpNorm::L1)); break;
        case VectorizerKind::AmplitudeL2: out.push_back(lp_amplitude(pd, dim, LpNorm::L2)); break;
        case VectorizerKind::Wasserstein: out.push_back(wasserstein_amplitude(pd, dim, v.p)); break;
        case VectorizerKind::Bottleneck: out.push_back(bottleneck_amplitude(pd, dim)); break;
        case VectorizerKind::BettiCurve: {
            Range r = value_range;
            if (!(r.min < r.max)) r = Range{r.min - 0.5, r.max + 0.5};
            auto curve = betti_curve(pd, dim, v.n_samples, r);
            out.insert(out.end(), curve.samples.begin(), curve.samples.end());
            break;
        }
        case VectorizerKind::HeatKernel:
            out.push_back(heat_kernel(pd, dim, v.sigma, v.resolution).l2_norm());
            break;
    }
}

FeatureVector extract_features(const BinaryImage& img, const FeatureSchema& schema) {
    FeatureVector fv;
    fv.values.reserve(schema.size());
    for (const auto& f : schema.filtrations()) {
        auto gray = apply_filtration(img, f);
        auto cx = build_cubical_filtration(gray);
        auto pd = compute_persistence(cx);
        Range range{0.0, 0.0};
        if (!cx.empty()) {
            pd = finitize(pd, cx.max_value());
            auto [lo, hi] = std::minmax_element(gray.values.begin(), gray.values.end());
            range = Range{*lo, *hi};
        }
        for (int k : schema.dims())
            for (const auto& v : schema.vectorizers()) vectorize_into(pd, k, v, range, fv.values);
    }
    return fv;
}

std::string features_csv(const FeatureSchema& schema, const std::vector<FeatureVector>& rows,
                         const std::vector<int>& labels) {
    if (rows.size() != labels.size()) throw ShapeError("features_csv: row and label counts differ");
    std::string out;
    for (const auto& c : schema.columns()) {
        out += c.id;
        out += ',';
    }
    out += "label\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].values.size() != schema.size())
            throw ShapeError(fmt::format("features_csv: row {} has {} values, schema has {}", i, rows[i].values.size(),
                                         schema.size()));
        for (double v : rows[i].values) {
            out += fmt::format("{:.17g}", v);
            out += ',';
        }
        out += fmt::format("{}\n", labels[i]);
    }
    return out;
}

}  // namespace tdac
