#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmlab/channel.hpp"
#include "wmlab/embed.hpp"
#include "wmlab/harness.hpp"
#include "wmlab/models.hpp"
#include "wmlab/theory.hpp"

namespace wmlab {

using Json = nlohmann::ordered_json;

// Detector file: the SchemeConfig fields plus the decision settings.
struct DetectConfig {
    SchemeConfig scheme;
    Statistic statistic = Statistic::correlator;
    Rule rule = Rule::single;
    double psi = 0.0;
    std::optional<double> shape;    // host shape for the optimum detectors
    std::optional<double> sigma_x;  // gaussian_attacked
    std::optional<double> sigma_v;
};

// All parsers reject unknown fields with ConfigError.
HostModel host_model_from_json(const Json& j);
Json to_json(const HostModel& m);

SchemeConfig scheme_config_from_json(const Json& j);
Json to_json(const SchemeConfig& c);

DetectConfig detect_config_from_json(const Json& j);

AttackSpec attack_spec_from_json(const Json& j);
Json to_json(const AttackSpec& a);

ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

Json to_json(const GaussianStatSummary& s);
Json to_json(const EmssDiagnostics& d);
Json to_json(const ExperimentReport& r);

Json read_json_file(const std::string& path);

// Newline-delimited decimal values.
std::vector<double> read_vector(std::istream& is);
std::vector<double> read_vector_file(const std::string& path);
void write_vector(const std::vector<double>& v, std::ostream& os);

// JSON has no infinity; +-inf and NaN become strings.
Json number_or_sentinel(double v);

}  // namespace wmlab
