#pragma once

// CSV (long format: eps,statistic,value) and JSON summaries, written
// atomically via a temporary file and rename.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spde/config.hpp"
#include "spde/studies.hpp"

namespace spde {

/// Shortest round-trip decimal form.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// Output directory: config value, else SPDE_LAB_OUTPUT_DIR, else ".".
inline std::filesystem::path output_directory(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("SPDE_LAB_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

inline std::string output_prefix(const RunConfig& cfg) {
  return cfg.output_prefix.empty() ? cfg.study : cfg.output_prefix;
}

namespace detail {

inline void csv_row(std::ostringstream& os, double eps, const char* stat, double value) {
  if (std::isnan(value)) return;
  os << format_number(eps) << ',' << stat << ',' << format_number(value) << '\n';
}

inline Json fit_json(const LogLogFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"ci95", {f.ci_low, f.ci_high}},
          {"points", f.points}};
}

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace detail

inline std::string study_csv(const StudyReport& rep) {
  std::ostringstream os;
  os << "eps,statistic,value\n";
  for (const auto& r : rep.rows) {
    detail::csv_row(os, r.eps, "N", r.max_mode);
    detail::csv_row(os, r.eps, "dt", r.dt);
    detail::csv_row(os, r.eps, "replicas", r.replicas);
    detail::csv_row(os, r.eps, "censored", r.censored);
    detail::csv_row(os, r.eps, "correction", r.correction);
    detail::csv_row(os, r.eps, "mean_error", r.mean);
    detail::csv_row(os, r.eps, "se_error", r.se);
    detail::csv_row(os, r.eps, "mean_naive_error", r.naive_mean);
    detail::csv_row(os, r.eps, "se_naive_error", r.naive_se);
  }
  return os.str();
}

inline Json study_json(const StudyReport& rep) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["study"] = rep.study;
  j["seed"] = rep.config.seed;
  j["config"] = to_json(rep.config);
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"eps", r.eps},
                    {"N", r.max_mode},
                    {"dt", r.dt},
                    {"replicas", r.replicas},
                    {"censored", r.censored},
                    {"correction", detail::number_or_null(r.correction)},
                    {"mean_error", detail::number_or_null(r.mean)},
                    {"se_error", detail::number_or_null(r.se)},
                    {"mean_naive_error", detail::number_or_null(r.naive_mean)},
                    {"se_naive_error", detail::number_or_null(r.naive_se)}});
  }
  j["rows"] = rows;
  j["fit"] = rep.fit ? detail::fit_json(*rep.fit) : Json(nullptr);
  j["naive_fit"] = rep.naive_fit ? detail::fit_json(*rep.naive_fit) : Json(nullptr);
  j["naive_over_corrected_at_smallest_eps"] = rep.naive_ratio ? Json(*rep.naive_ratio) : Json(nullptr);
  j["constants"] = {{"white_noise_constant", rep.asymptotic_constant}};
  j["notes"] = rep.notes;
  return j;
}

inline std::string averaging_csv(const TailReport& rep) {
  std::ostringstream os;
  os << "eps,statistic,value\n";
  for (std::size_t ie = 0; ie < rep.eps.size(); ++ie) {
    detail::csv_row(os, rep.eps[ie], "N", rep.max_modes[ie]);
    for (std::size_t q = 0; q < rep.quantiles.size(); ++q) {
      const std::string level = format_number(rep.quantiles[q]);
      detail::csv_row(os, rep.eps[ie], ("q" + level + "_phi").c_str(), rep.phi[ie][q]);
      detail::csv_row(os, rep.eps[ie], ("q" + level + "_phi_tilde").c_str(), rep.phi_tilde[ie][q]);
    }
  }
  return os.str();
}

inline Json averaging_json(const TailReport& rep, const RunConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["study"] = "averaging";
  j["seed"] = cfg.seed;
  j["config"] = to_json(cfg);
  j["statistic"] = "eps * ||phi||_{-gamma}";
  Json fits = Json::array();
  for (std::size_t q = 0; q < rep.quantiles.size() && q < rep.phi_fit.size(); ++q)
    fits.push_back({{"quantile", rep.quantiles[q]},
                    {"phi", detail::fit_json(rep.phi_fit[q])},
                    {"phi_tilde", detail::fit_json(rep.phi_tilde_fit[q])}});
  j["fits"] = fits;
  return j;
}

/// Writes <prefix>.csv and <prefix>.json; returns the CSV path.
inline std::filesystem::path write_report_files(const RunConfig& cfg, const std::string& csv, const Json& json) {
  const auto dir = output_directory(cfg);
  const auto prefix = output_prefix(cfg);
  const auto csv_path = dir / (prefix + ".csv");
  write_atomic(csv_path, csv);
  write_atomic(dir / (prefix + ".json"), json.dump(2) + "\n");
  return csv_path;
}

}  // namespace spde
