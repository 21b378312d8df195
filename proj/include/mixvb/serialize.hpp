#pragma once

#include <json.hpp>

#include "mixvb/bench_harness.hpp"
#include "mixvb/cavi_engine.hpp"
#include "mixvb/em_baseline.hpp"
#include "mixvb/mixture_model.hpp"
#include "mixvb/model_selection.hpp"
#include "mixvb/prior_variational.hpp"
#include "mixvb/rates.hpp"

/// JSON bindings for every public record (nlohmann ADL pairs). Field names are
/// part of the CLI's output contract; parsers reject malformed documents with
/// InputError so callers can map them to the input-error exit path.
namespace mixvb {

void to_json(nlohmann::json& j, const ComponentFamily& family);
void from_json(const nlohmann::json& j, ComponentFamily& family);

void to_json(nlohmann::json& j, const MixtureParams& params);
void from_json(const nlohmann::json& j, MixtureParams& params);

void to_json(nlohmann::json& j, const ComponentPrior& prior);
void from_json(const nlohmann::json& j, ComponentPrior& prior);

void to_json(nlohmann::json& j, const PriorSpec& prior);
void from_json(const nlohmann::json& j, PriorSpec& prior);

void to_json(nlohmann::json& j, const ComponentFactor& factor);
void from_json(const nlohmann::json& j, ComponentFactor& factor);

void to_json(nlohmann::json& j, const VariationalState& state);
void from_json(const nlohmann::json& j, VariationalState& state);

void to_json(nlohmann::json& j, const McEstimate& estimate);
void from_json(const nlohmann::json& j, McEstimate& estimate);

void to_json(nlohmann::json& j, const FitConfig& config);
void from_json(const nlohmann::json& j, FitConfig& config);

void to_json(nlohmann::json& j, const FitResult& result);

void to_json(nlohmann::json& j, const SelectionResult& result);

void to_json(nlohmann::json& j, const EmResult& result);

void to_json(nlohmann::json& j, const RateReport& report);

void to_json(nlohmann::json& j, const BenchProtocol& protocol);
void from_json(const nlohmann::json& j, BenchProtocol& protocol);

void to_json(nlohmann::json& j, const BenchReport& report);

void to_json(nlohmann::json& j, const DivergenceProtocol& protocol);
void from_json(const nlohmann::json& j, DivergenceProtocol& protocol);

void to_json(nlohmann::json& j, const DivergenceRow& row);

}  // namespace mixvb
