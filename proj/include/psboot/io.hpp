#pragma once

#include "psboot/fda.hpp"
#include "psboot/maxstat.hpp"
#include "psboot/model.hpp"
#include "psboot/multinomial.hpp"
#include "psboot/ratelab.hpp"
#include "psboot/sci.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace psboot::io {

using Json = nlohmann::ordered_json;

/// %.17g
std::string format_double(double v);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

// Samples: header "1,...,p", then one row per observation.
void write_sample_csv(const std::filesystem::path& path, const SampleMatrix& x);
SampleMatrix read_sample_csv(const std::filesystem::path& path);

// Bootstrap draws: "b,L_star,M_star" with b 1-based.
std::string draws_csv(const BootstrapDraws& d);
Json draws_sidecar(const BootstrapDraws& d);

// Intervals: "j,lo,hi,sigma_hat,width" with j 1-based.
std::string sci_csv(const SciSet& s);
Json sci_json(const SciSet& s);

/// {"p": 10, "sigma": [...] | {"kind": "power", "c": 1, "alpha": 0.7},
///  "corr": {"kind": "identity" | "autoregressive" | ..., params}}
CovarianceModel model_from_json(const Json& j);
Json model_to_json(const CovarianceModel& m);
CorrelationSpec correlation_from_json(const Json& j);
Json correlation_to_json(const CorrelationSpec& spec);

/// {"kind": "zipf", "p": 1000, "eta": 1} | {"pi": [...]} | {"pi_csv": path}.
/// Relative pi_csv paths resolve against `base`.
multinomial::MultinomialModel multinomial_model_from_json(const Json& j, const std::filesystem::path& base);
std::vector<double> read_vector_csv(const std::filesystem::path& path);

Json diagnostics_json(const DecayDiagnostics& d);

Json fda_report_json(const fda::FdaReport& r);
std::string fda_sims_csv(const fda::FdaReport& r);

Json multinomial_report_json(const multinomial::ExperimentReport& r);
std::string multinomial_sims_csv(const multinomial::ExperimentReport& r);

std::string rate_csv(const ratelab::RateStudyResult& r);
Json rate_json(const ratelab::RateStudyResult& r);

}  // namespace psboot::io
