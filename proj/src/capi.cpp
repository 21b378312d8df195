#include "mixvb.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mixvb/bench_harness.hpp"
#include "mixvb/cavi_engine.hpp"
#include "mixvb/dataset_io.hpp"
#include "mixvb/errors.hpp"
#include "mixvb/mixture_model.hpp"
#include "mixvb/model_selection.hpp"
#include "mixvb/rates.hpp"
#include "mixvb/serialize.hpp"

struct mixvb_dataset {
    mixvb::Dataset data;
};

struct mixvb_result {
    nlohmann::json doc;
    std::string csv;
};

namespace {

using nlohmann::json;

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

mixvb_status fail_input(const char* message) {
    t_last_error = message;
    return MIXVB_ERR_INPUT;
}

/* Every entry point funnels through here so the status mapping is uniform:
 * malformed input and range violations report MIXVB_ERR_INPUT, broken
 * numerical invariants MIXVB_ERR_NUMERIC, everything else MIXVB_ERR_INTERNAL. */
template <typename Fn>
mixvb_status guarded(Fn&& fn) {
    try {
        fn();
        return MIXVB_OK;
    } catch (const mixvb::NumericError& e) {
        t_last_error = e.what();
        return MIXVB_ERR_NUMERIC;
    } catch (const mixvb::InputError& e) {
        t_last_error = e.what();
        return MIXVB_ERR_INPUT;
    } catch (const json::exception& e) {
        t_last_error = e.what();
        return MIXVB_ERR_INPUT;
    } catch (const std::logic_error& e) {
        t_last_error = e.what();
        return MIXVB_ERR_INPUT;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return MIXVB_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return MIXVB_ERR_INTERNAL;
    }
}

json require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw mixvb::InputError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

mixvb::FitConfig config_of(const json& job) {
    mixvb::FitConfig config;
    if (job.contains("config")) config = job.at("config").get<mixvb::FitConfig>();
    return config;
}

mixvb::ModelWeights parse_model_weights(const json& job, int k_max) {
    const std::string name = job.value("model_weights", std::string("geometric"));
    if (name == "geometric") return mixvb::GeometricModelWeights{};
    if (name == "uniform") return mixvb::UniformModelWeights{k_max};
    throw mixvb::InputError("unknown model weights '" + name + "'");
}

json job_fit(const mixvb::Dataset& data, const json& job) {
    const auto family = require(job, "family").get<mixvb::ComponentFamily>();
    const auto prior = require(job, "prior").get<mixvb::PriorSpec>();
    return mixvb::fit(data, prior, family, config_of(job));
}

json job_select(const mixvb::Dataset& data, const json& job) {
    const auto family = require(job, "family").get<mixvb::ComponentFamily>();
    const int k_max = job.value("k_max", 10);
    const double concentration = job.value("weight_prior_concentration", 1.0);
    const auto component_prior = require(job, "component_prior").get<mixvb::ComponentPrior>();
    const mixvb::ModelWeights weights = parse_model_weights(job, k_max);
    const mixvb::FitConfig config = config_of(job);
    const auto prior_for_k = [&](int k) {
        return mixvb::PriorSpec{
            mixvb::DirichletParams{std::vector<double>(static_cast<std::size_t>(k),
                                                       concentration)},
            component_prior};
    };
    return mixvb::select_k(data, prior_for_k, family, k_max, weights, config);
}

json job_select_from_scores(const json& job) {
    std::vector<std::pair<int, double>> objectives;
    for (const json& row : require(job, "objectives")) {
        if (!row.is_array() || row.size() != 2) {
            throw mixvb::InputError("objectives rows must be [k, elbo] pairs");
        }
        objectives.emplace_back(row.at(0).get<int>(), row.at(1).get<double>());
    }
    const int k_max = job.value("k_max", 10);
    const mixvb::ModelWeights weights = parse_model_weights(job, k_max);
    std::vector<double> scores;
    const int selected = mixvb::select_from_scores(objectives, weights, &scores);
    json entries = json::array();
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        entries.push_back(json{{"k", objectives[i].first},
                               {"elbo", objectives[i].second},
                               {"log_weight", mixvb::model_log_weight(weights,
                                                                      objectives[i].first)},
                               {"score", scores[i]}});
    }
    return json{{"selected_k", selected}, {"entries", entries}};
}

struct RateEval {
    double rate = 0.0;
    double r_nk = 0.0;  // per-parameter form feeding the divergence bound
};

RateEval eval_rate(const json& job, std::size_t n) {
    const std::string kind = require(job, "rate").get<std::string>();
    const int k = require(job, "k").get<int>();
    if (kind == "dirichlet") {
        const double r = mixvb::rate_dirichlet(n, k);
        return {r, r};
    }
    if (kind == "multinomial") {
        const int v = require(job, "categories").get<int>();
        const double r = mixvb::rate_multinomial(n, k, v);
        return {r, r / (2.0 * k)};
    }
    if (kind == "gauss_known") {
        const double r = mixvb::rate_gaussian_known_var(
            n, k, job.value("component_variance", 1.0), job.value("prior_variance", 1.0),
            require(job, "true_means").get<std::vector<double>>());
        return {r, r};
    }
    if (kind == "gauss_nig" || kind == "gauss_factorized") {
        std::vector<mixvb::GaussianParams> components;
        for (const json& c : require(job, "true_components")) {
            components.push_back(mixvb::GaussianParams{require(c, "mean").get<double>(),
                                                       require(c, "variance").get<double>()});
        }
        const double pv = job.value("prior_variance", 1.0);
        const double gs = job.value("ig_scale", 1.0);
        const double r = kind == "gauss_nig"
                             ? mixvb::rate_gaussian_nig(n, k, pv, gs, components)
                             : mixvb::rate_gaussian_factorized(n, k, pv, gs, components);
        return {r, r};
    }
    if (kind == "misspecified") {
        const double r = mixvb::rate_misspecified_gaussian(
            n, k, job.value("prior_variance", 1.0), require(job, "mean_bound").get<double>());
        return {r, r};
    }
    throw mixvb::InputError("unknown rate kind '" + kind + "'");
}

void job_rates(const json& job, json& doc, std::string& csv) {
    const std::size_t n = require(job, "n").get<std::size_t>();
    const int k = require(job, "k").get<int>();
    double alpha = 0.0;
    bool with_bound = false;
    if (job.contains("alpha")) {
        alpha = job.at("alpha").get<double>();
        if (alpha <= 0.0 || alpha > 1.0) {
            throw mixvb::InputError("alpha must lie in (0, 1]");
        }
        with_bound = alpha < 1.0;  // the divergence bound needs alpha < 1
    }

    const RateEval eval = eval_rate(job, n);
    doc = job;
    doc.erase("sweep");
    doc["rate"] = eval.rate;
    doc["r_nk"] = eval.r_nk;
    if (with_bound) {
        doc["bound"] = mixvb::make_rate_report(eval.r_nk, k, alpha).bound;
    }

    if (!job.contains("sweep")) return;
    const auto grid = job.at("sweep").get<std::vector<std::size_t>>();
    csv = with_bound ? "n,rate,r_nk,bound\n" : "n,rate,r_nk\n";
    char line[160];
    for (const std::size_t n_i : grid) {
        const RateEval e = eval_rate(job, n_i);
        if (with_bound) {
            std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g\n", n_i, e.rate, e.r_nk,
                          mixvb::make_rate_report(e.r_nk, k, alpha).bound);
        } else {
            std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", n_i, e.rate, e.r_nk);
        }
        csv += line;
    }
}

mixvb_status make_result(mixvb_result** out, json doc, std::string csv = std::string()) {
    auto handle = std::make_unique<mixvb_result>();
    handle->doc = std::move(doc);
    handle->csv = std::move(csv);
    *out = handle.release();
    return MIXVB_OK;
}

}  // namespace

extern "C" {

const char* mixvb_last_error(void) { return t_last_error.c_str(); }

void mixvb_string_free(char* s) { std::free(s); }

mixvb_status mixvb_dataset_read_csv(const char* path, mixvb_dataset** out) {
    if (path == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        auto handle = std::make_unique<mixvb_dataset>();
        handle->data = mixvb::read_dataset_csv(path);
        *out = handle.release();
    });
}

mixvb_status mixvb_dataset_write_csv(const mixvb_dataset* data, const char* path) {
    if (data == nullptr || path == nullptr) return fail_input("null argument");
    return guarded([&] { mixvb::write_dataset_csv(data->data, path); });
}

mixvb_status mixvb_dataset_simulate(const char* model_json, int64_t n, uint64_t seed,
                                    mixvb_dataset** out) {
    if (model_json == nullptr || out == nullptr) return fail_input("null argument");
    if (n < 0) return fail_input("sample count must be >= 0");
    return guarded([&] {
        const auto params = json::parse(model_json).get<mixvb::MixtureParams>();
        auto handle = std::make_unique<mixvb_dataset>();
        handle->data = mixvb::sample_mixture(params, static_cast<std::size_t>(n), seed);
        *out = handle.release();
    });
}

mixvb_status mixvb_dataset_csv(const mixvb_dataset* data, char** out) {
    if (data == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        std::ostringstream text;
        mixvb::write_dataset_csv(data->data, text);
        *out = dup_string(text.str());
        if (*out == nullptr) throw std::bad_alloc();
    });
}

int64_t mixvb_dataset_size(const mixvb_dataset* data) {
    if (data == nullptr) return -1;
    return static_cast<int64_t>(data->data.size());
}

void mixvb_dataset_free(mixvb_dataset* data) { delete data; }

mixvb_status mixvb_fit(const mixvb_dataset* data, const char* job_json, mixvb_result** out) {
    if (data == nullptr || job_json == nullptr || out == nullptr) {
        return fail_input("null argument");
    }
    return guarded([&] { make_result(out, job_fit(data->data, json::parse(job_json))); });
}

mixvb_status mixvb_select(const mixvb_dataset* data, const char* job_json, mixvb_result** out) {
    if (data == nullptr || job_json == nullptr || out == nullptr) {
        return fail_input("null argument");
    }
    return guarded([&] { make_result(out, job_select(data->data, json::parse(job_json))); });
}

mixvb_status mixvb_select_from_scores(const char* job_json, mixvb_result** out) {
    if (job_json == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] { make_result(out, job_select_from_scores(json::parse(job_json))); });
}

mixvb_status mixvb_rates(const char* job_json, mixvb_result** out) {
    if (job_json == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        json doc;
        std::string csv;
        job_rates(json::parse(job_json), doc, csv);
        make_result(out, std::move(doc), std::move(csv));
    });
}

mixvb_status mixvb_bench(const char* protocol_json, mixvb_result** out) {
    if (protocol_json == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        const auto protocol = json::parse(protocol_json).get<mixvb::BenchProtocol>();
        const mixvb::BenchReport report = mixvb::run_supplement_bench(protocol);
        make_result(out, report, mixvb::bench_report_csv(report));
    });
}

mixvb_status mixvb_divergence(const char* protocol_json, mixvb_result** out) {
    if (protocol_json == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        const auto protocol = json::parse(protocol_json).get<mixvb::DivergenceProtocol>();
        const std::vector<mixvb::DivergenceRow> rows =
            mixvb::run_divergence_experiment(protocol);
        make_result(out, json{{"protocol", protocol}, {"rows", rows}},
                    mixvb::divergence_csv(rows));
    });
}

mixvb_status mixvb_result_json(const mixvb_result* result, int pretty, char** out) {
    if (result == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        const std::string text = pretty != 0 ? result->doc.dump(2) : result->doc.dump();
        *out = dup_string(text);
        if (*out == nullptr) throw std::bad_alloc();
    });
}

mixvb_status mixvb_result_csv(const mixvb_result* result, char** out) {
    if (result == nullptr || out == nullptr) return fail_input("null argument");
    return guarded([&] {
        *out = dup_string(result->csv);
        if (*out == nullptr) throw std::bad_alloc();
    });
}

void mixvb_result_free(mixvb_result* result) { delete result; }

}  // extern "C"
