#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "json.hpp"

#include "extremal/extremal.hpp"

namespace extremal::app {

// Configuration problem located by a JSON pointer into the document.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

struct SystemSpec {
    int n = 0;
    int k = 0;
    std::string drift;
    std::vector<std::string> controlled;
    std::vector<std::string> frame_tail;  // empty: completed at the anchor
    double eps_fd = kDefaultFdStep;
};

struct AnnihilatorChoice {};

struct SphereSpec {
    std::optional<Vector> u0;  // random (seeded) when absent
    double s_end = 10.0;
    double output_ds = 0.1;
    int random_starts = 100;
};

struct IntegrateSpec {
    double t_hat = 0.0;
    double t_end = 1.0;
    std::optional<LiftedPoint> start;  // explicit blow-up start; otherwise lifted from (covector, anchor)
};

struct OracleSpec {
    int samples = 1000;
    int max_switches = 1;
    std::optional<LinearInstance> linear;
    GridResolution grid;
};

struct RunConfig {
    SystemSpec system;
    Vector anchor;
    std::variant<Vector, AnnihilatorChoice> covector;
    std::optional<BracketData> brackets;  // overrides bracket_data at the anchor
    IntegratorConfig integrator;
    IntegrateSpec integrate;
    SphereSpec sphere;
    OracleSpec oracle;
    std::uint64_t seed = 1;
};

// Parses and validates a configuration document; throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

AffineSystem build_system(const RunConfig& config);

// The unit covector at the anchor (explicit or annihilator choice).
Vector resolve_covector(const RunConfig& config, const AffineSystem& system);

}  // namespace extremal::app
