#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdac/imaging.hpp"
#include "tdac/persistence.hpp"

namespace tdac {

struct Range {
    double min = 0.0;
    double max = 1.0;
};

struct BettiCurve {
    Range range;
    std::vector<double> samples;  // uniform grid over [range.min, range.max]
};

struct HeatGrid {
    Range range;  // shared by the birth (x) and death (y) axes
    double sigma = 1.0;
    std::size_t resolution = 0;
    std::vector<double> values;  // values[iy * resolution + ix]

    double at(std::size_t ix, std::size_t iy) const { return values[iy * resolution + ix]; }
    // Riemann-sum L2 norm over the grid cells.
    double l2_norm() const;
};

enum class LpNorm { L1, L2 };

// All of these read dimension k of a finitized diagram.
double persistence_entropy(const PersistenceDiagram& pd, int k);
BettiCurve betti_curve(const PersistenceDiagram& pd, int k, std::size_t n_samples, Range range);
// Range defaults to the diagram's bounding box padded by 3 sigma.
HeatGrid heat_kernel(const PersistenceDiagram& pd, int k, double sigma, std::size_t resolution = 32,
                     std::optional<Range> range = std::nullopt);
double wasserstein_amplitude(const PersistenceDiagram& pd, int k, double p);
double bottleneck_amplitude(const PersistenceDiagram& pd, int k);
double lp_amplitude(const PersistenceDiagram& pd, int k, LpNorm norm);

// ---------------------------------------------------------------------------
// Feature schema

struct HeightFiltration {
    double dx = -1.0;
    double dy = 1.0;
};

// No center means the image midpoint (floor(w/2), floor(h/2)).
struct RadialFiltration {
    std::optional<Center> center;
};

using FiltrationSpec = std::variant<HeightFiltration, RadialFiltration>;

enum class VectorizerKind { Entropy, AmplitudeL1, AmplitudeL2, Wasserstein, Bottleneck, BettiCurve, HeatKernel };

struct VectorizerSpec {
    VectorizerKind kind = VectorizerKind::Entropy;
    double p = 2.0;              // Wasserstein order
    std::size_t n_samples = 16;  // Betti curve
    double sigma = 0.5;          // heat kernel
    std::size_t resolution = 32;

    std::size_t width() const { return kind == VectorizerKind::BettiCurve ? n_samples : 1; }
};

struct FeatureColumn {
    std::size_t filtration = 0;
    int dim = 0;
    std::size_t vectorizer = 0;
    std::size_t component = 0;
    std::string id;
};

class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<FiltrationSpec> filtrations, std::vector<int> dims, std::vector<VectorizerSpec> vectorizers);

    // height(-1,1) and radial(mid), H0 and H1, persistence entropy.
    static FeatureSchema default_schema();
    // Throws ConfigError on unknown or malformed entries.
    static FeatureSchema from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;

    const std::vector<FiltrationSpec>& filtrations() const { return filtrations_; }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<VectorizerSpec>& vectorizers() const { return vectorizers_; }
    const std::vector<FeatureColumn>& columns() const { return columns_; }
    std::size_t size() const { return columns_.size(); }

    friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) { return a.to_json() == b.to_json(); }

private:
    std::vector<FiltrationSpec> filtrations_;
    std::vector<int> dims_;
    std::vector<VectorizerSpec> vectorizers_;
    std::vector<FeatureColumn> columns_;
};

std::string filtration_id(const FiltrationSpec& f);

struct FeatureVector {
    std::vector<double> values;
};

GrayImage apply_filtration(const BinaryImage& img, const FiltrationSpec& f);

// Finitized persistence of one filtration of an image; essential deaths are
// replaced by the maximum filtration value of the complex.
PersistenceDiagram filtered_diagram(const BinaryImage& img, const FiltrationSpec& f);

// Appends the schema-ordered components for one diagram.
void vectorize_into(const PersistenceDiagram& finite_pd, int dim, const VectorizerSpec& v, const Range& value_range,
                    std::vector<double>& out);

FeatureVector extract_features(const BinaryImage& img, const FeatureSchema& schema);

// Header of schema ids plus "label"; values with 17 significant digits.
std::string features_csv(const FeatureSchema& schema, const std::vector<FeatureVector>& rows,
                         const std::vector<int>& labels);

}  // namespace tdac
