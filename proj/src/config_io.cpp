#include "hpjks/config_io.hpp"

#include <initializer_list>
#include <string>

#include "hpjks/error.hpp"
#include "io_util.hpp"

namespace hpjks {

namespace {

void require_object(const Json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument(std::string("unknown key '") + key + "' in " + what);
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->template get<T>();
}

}  // namespace

void to_json(Json& j, const LatentDistSpec& v) {
  j = Json{{"family", to_string(v.family)}, {"a", v.a}, {"b", v.b}};
  if (v.family == LatentFamily::kStudentT) j["df"] = v.df;
}

void from_json(const Json& j, LatentDistSpec& v) {
  require_object(j, "latent", {"family", "a", "b", "df"});
  v = LatentDistSpec{};
  if (auto it = j.find("family"); it != j.end()) v.family = parse_latent_family(it->get<std::string>());
  if (v.family == LatentFamily::kUniform) {
    v.a = 0.0;
    v.b = 1.0;
  }
  read_opt(j, "a", v.a);
  read_opt(j, "b", v.b);
  read_opt(j, "df", v.df);
}

void to_json(Json& j, const NoiseSpec& v) {
  j = Json{{"law", to_string(v.law)}, {"sd", v.sd}, {"df", v.df}, {"ar1", v.ar1}};
}

void from_json(const Json& j, NoiseSpec& v) {
  require_object(j, "noise", {"law", "sd", "df", "ar1"});
  v = NoiseSpec{};
  if (auto it = j.find("law"); it != j.end()) v.law = parse_noise_law(it->get<std::string>());
  read_opt(j, "sd", v.sd);
  read_opt(j, "df", v.df);
  read_opt(j, "ar1", v.ar1);
}

void to_json(Json& j, const InputProcess& v) {
  j = Json{{"log_k_mean", v.log_k_mean}, {"log_k_sd", v.log_k_sd},       {"log_l_mean", v.log_l_mean},
           {"log_l_sd", v.log_l_sd},     {"theta_correlation", v.theta_correlation}};
}

void from_json(const Json& j, InputProcess& v) {
  require_object(j, "inputs", {"log_k_mean", "log_k_sd", "log_l_mean", "log_l_sd", "theta_correlation"});
  v = InputProcess{};
  read_opt(j, "log_k_mean", v.log_k_mean);
  read_opt(j, "log_k_sd", v.log_k_sd);
  read_opt(j, "log_l_mean", v.log_l_mean);
  read_opt(j, "log_l_sd", v.log_l_sd);
  read_opt(j, "theta_correlation", v.theta_correlation);
}

void to_json(Json& j, const DgpConfig& v) {
  Json beta0 = Json::object();
  for (int y = v.first_year; y <= v.last_year(); ++y) beta0[std::to_string(y)] = v.beta0(y);
  j = Json{{"sector", v.sector},
           {"first_year", v.first_year},
           {"tenure", v.tenure},
           {"n_amd", v.n_amd},
           {"n_bmd", v.n_bmd},
           {"beta0_by_year", beta0},
           {"beta1", v.beta1},
           {"beta2", v.beta2},
           {"latent", v.latent},
           {"amd_latent", nullptr},
           {"mu", v.mu},
           {"sigma", v.sigma},
           {"xi", v.xi},
           {"noise", v.noise},
           {"inputs", v.inputs},
           {"seed", v.seed}};
  if (v.amd_latent) j["amd_latent"] = *v.amd_latent;
}

void from_json(const Json& j, DgpConfig& v) {
  require_object(j, "dgp config",
                 {"sector", "first_year", "tenure", "n_amd", "n_bmd", "beta0_by_year", "beta1", "beta2", "latent",
                  "amd_latent", "mu", "sigma", "xi", "noise", "inputs", "seed"});
  v = DgpConfig{};
  read_opt(j, "sector", v.sector);
  read_opt(j, "first_year", v.first_year);
  read_opt(j, "tenure", v.tenure);
  read_opt(j, "n_amd", v.n_amd);
  read_opt(j, "n_bmd", v.n_bmd);
  if (auto it = j.find("beta0_by_year"); it != j.end() && !it->is_null()) {
    for (const auto& [year, value] : it->items()) v.beta0_by_year[std::stoi(year)] = value.get<double>();
  }
  read_opt(j, "beta1", v.beta1);
  read_opt(j, "beta2", v.beta2);
  read_opt(j, "latent", v.latent);
  if (auto it = j.find("amd_latent"); it != j.end() && !it->is_null()) v.amd_latent = it->get<LatentDistSpec>();
  read_opt(j, "mu", v.mu);
  read_opt(j, "sigma", v.sigma);
  read_opt(j, "xi", v.xi);
  read_opt(j, "noise", v.noise);
  read_opt(j, "inputs", v.inputs);
  read_opt(j, "seed", v.seed);
}

void to_json(Json& j, const ExperimentGrid& v) {
  j = Json{{"xi", v.xi}, {"firms", v.firms}, {"tenure", v.tenure},
           {"noise_sd", v.noise_sd}, {"mu", v.mu}, {"sigma", v.sigma}};
}

void from_json(const Json& j, ExperimentGrid& v) {
  require_object(j, "grid", {"xi", "firms", "tenure", "noise_sd", "mu", "sigma"});
  v = ExperimentGrid{};
  read_opt(j, "xi", v.xi);
  read_opt(j, "firms", v.firms);
  read_opt(j, "tenure", v.tenure);
  read_opt(j, "noise_sd", v.noise_sd);
  read_opt(j, "mu", v.mu);
  read_opt(j, "sigma", v.sigma);
}

void to_json(Json& j, const ExperimentConfig& v) {
  j = Json{{"kind", to_string(v.kind)},
           {"base", v.base},
           {"grid", v.grid},
           {"replications", v.replications},
           {"bootstrap", v.bootstrap},
           {"alpha", v.alpha},
           {"master_seed", v.master_seed},
           {"eval_probabilities", v.eval_probabilities},
           {"noise_simulation", v.noise_simulation == NoiseSimulation::kAuto ? "auto" : "per_period"}};
}

void from_json(const Json& j, ExperimentConfig& v) {
  require_object(j, "experiment config",
                 {"kind", "base", "grid", "replications", "bootstrap", "alpha", "master_seed", "threads",
                  "eval_probabilities", "noise_simulation"});
  v = ExperimentConfig{};
  if (auto it = j.find("kind"); it != j.end()) v.kind = parse_experiment_kind(it->get<std::string>());
  read_opt(j, "base", v.base);
  read_opt(j, "grid", v.grid);
  read_opt(j, "replications", v.replications);
  read_opt(j, "bootstrap", v.bootstrap);
  read_opt(j, "alpha", v.alpha);
  read_opt(j, "master_seed", v.master_seed);
  read_opt(j, "threads", v.threads);
  read_opt(j, "eval_probabilities", v.eval_probabilities);
  if (auto it = j.find("noise_simulation"); it != j.end()) {
    const auto mode = it->get<std::string>();
    if (mode == "auto") {
      v.noise_simulation = NoiseSimulation::kAuto;
    } else if (mode == "per_period") {
      v.noise_simulation = NoiseSimulation::kPerPeriod;
    } else {
      throw std::invalid_argument("noise_simulation must be 'auto' or 'per_period'");
    }
  }
}

void to_json(Json& j, const ColumnMapping& v) {
  j = Json{{"firm_id", v.firm_id}, {"year", v.year},   {"sector", v.sector}, {"area", v.area},
           {"value_added", v.value_added}, {"capital", v.capital}, {"labor", v.labor},
           {"employees", nullptr}, {"category", nullptr}};
  if (v.employees) j["employees"] = *v.employees;
  if (v.category) j["category"] = *v.category;
}

void from_json(const Json& j, ColumnMapping& v) {
  require_object(j, "columns",
                 {"firm_id", "year", "sector", "area", "value_added", "capital", "labor", "employees", "category"});
  v = ColumnMapping{};
  read_opt(j, "firm_id", v.firm_id);
  read_opt(j, "year", v.year);
  read_opt(j, "sector", v.sector);
  read_opt(j, "area", v.area);
  read_opt(j, "value_added", v.value_added);
  read_opt(j, "capital", v.capital);
  read_opt(j, "labor", v.labor);
  if (auto it = j.find("employees"); it != j.end() && !it->is_null()) v.employees = it->get<std::string>();
  if (auto it = j.find("category"); it != j.end() && !it->is_null()) v.category = it->get<std::string>();
}

void to_json(Json& j, const CleaningConfig& v) {
  j = Json{{"min_tenure", v.min_tenure},
           {"drop_nonpositive", v.drop_nonpositive},
           {"excluded_sectors", v.excluded_sectors},
           {"max_employees", nullptr},
           {"include_categories", nullptr},
           {"require_consecutive_years", v.require_consecutive_years}};
  if (v.max_employees) j["max_employees"] = *v.max_employees;
  if (v.include_categories) j["include_categories"] = *v.include_categories;
}

void from_json(const Json& j, CleaningConfig& v) {
  require_object(j, "cleaning",
                 {"min_tenure", "drop_nonpositive", "excluded_sectors", "max_employees", "include_categories",
                  "require_consecutive_years"});
  v = CleaningConfig{};
  read_opt(j, "min_tenure", v.min_tenure);
  read_opt(j, "drop_nonpositive", v.drop_nonpositive);
  read_opt(j, "excluded_sectors", v.excluded_sectors);
  if (auto it = j.find("max_employees"); it != j.end() && !it->is_null()) v.max_employees = it->get<double>();
  if (auto it = j.find("include_categories"); it != j.end() && !it->is_null()) {
    v.include_categories = it->get<std::set<std::string>>();
  }
  read_opt(j, "require_consecutive_years", v.require_consecutive_years);
}

void to_json(Json& j, const CleaningReport& v) {
  Json dropped = Json::object();
  for (std::size_t r = 0; r < kCleaningRuleCount; ++r) {
    dropped[std::string(to_string(static_cast<CleaningRule>(r)))] = v.dropped[r];
  }
  Json firms = Json::array();
  for (const auto& [key, count] : v.firms_retained) {
    firms.push_back(Json{{"sector", key.first}, {"area", std::string(to_string(key.second))}, {"firms", count}});
  }
  j = Json{{"input_records", v.input_records},
           {"retained_records", v.retained_records},
           {"dropped", dropped},
           {"dropped_total", v.dropped_total()},
           {"relabeled_firms", v.relabeled_firms},
           {"firms_retained", firms}};
}

void to_json(Json& j, const ProductionEstimate& v) {
  Json beta0 = Json::object();
  for (const auto& [year, value] : v.beta0_by_year) beta0[std::to_string(year)] = value;
  j = Json{{"sector", v.sector},
           {"area", std::string(to_string(v.area))},
           {"beta1", v.beta1},
           {"beta2", v.beta2},
           {"beta0_by_year", beta0},
           {"n_obs", v.n_obs},
           {"residual_variance", v.residual_variance}};
}

void to_json(Json& j, const TestResult& v) {
  j = Json{{"sector", v.sector},
           {"statistic", v.statistic},
           {"p_value", v.p_value},
           {"n_bootstrap", v.n_bootstrap},
           {"completed_draws", v.completed_draws},
           {"degenerate_draws", v.degenerate_draws},
           {"exceedances", v.exceedances},
           {"n_amd", v.n_amd},
           {"n_bmd", v.n_bmd},
           {"t_min", v.t_min},
           {"validity_ratio", v.validity_ratio},
           {"warnings", v.warnings}};
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  io::write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace hpjks
