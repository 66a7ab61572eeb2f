#include "pinlab/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "pinlab/errors.hpp"

namespace pinlab {

std::string format_double(double v) {
  if (!std::isfinite(v))
    throw Error("format_double: refusing to write a non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json partition_to_json(const PartitionTable& table) {
  Json j;
  j["scale"] = "log";
  j["log_Z_free"] = table.log_Z_free;
  j["log_Z_pinned"] = table.log_Z_pinned;
  j["log_z_pinned"] = table.log_z_pinned;
  return j;
}

Json contacts_to_json(const ContactDistribution& dist) {
  Json j;
  j["scale"] = "linear";
  j["probs"] = dist.probs;
  j["overflow_mass"] = dist.overflow_mass;
  return j;
}

Json estimate_to_json(const FreeEnergyEstimate& est) {
  Json j;
  j["h"] = est.h;
  j["beta"] = est.beta;
  j["N"] = est.N;
  j["replicas"] = est.replicas;
  j["mean_log_Z_pinned_over_N"] = est.mean_log_Z_pinned_over_N;
  j["stderr_of_mean"] = est.stderr_of_mean;
  j["per_replica"] = est.per_replica;
  return j;
}

FreeEnergyEstimate estimate_from_json(const Json& j) {
  FreeEnergyEstimate est;
  try {
    est.h = j.at("h").get<double>();
    est.beta = j.at("beta").get<double>();
    est.N = j.at("N").get<std::int64_t>();
    est.replicas = j.at("replicas").get<std::int64_t>();
    est.mean_log_Z_pinned_over_N = j.at("mean_log_Z_pinned_over_N").get<double>();
    est.stderr_of_mean = j.at("stderr_of_mean").get<double>();
    est.per_replica = j.at("per_replica").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("estimate_from_json: malformed record: ") + e.what());
  }
  if (est.per_replica.size() != static_cast<std::size_t>(est.replicas))
    throw Error("estimate_from_json: replica count does not match the values");
  return est;
}

Json curve_to_json(const FreeEnergyCurve& curve) {
  Json j;
  j["beta"] = curve.beta;
  j["alpha"] = curve.alpha;
  j["tilde_alpha"] = curve.tilde_alpha;
  Json points = Json::array();
  for (const FreeEnergyEstimate& p : curve.points)
    points.push_back(estimate_to_json(p));
  j["points"] = std::move(points);
  return j;
}

Json exponent_fit_to_json(const ExponentFit& fit) {
  Json j;
  j["nu"] = fit.nu;
  j["log_correction_coeff"] = fit.log_correction_coeff;
  j["residual"] = fit.residual;
  j["nu_pinned_correction"] = fit.nu_pinned_correction;
  j["residual_pinned_correction"] = fit.residual_pinned_correction;
  j["h_min"] = fit.h_min;
  j["h_max"] = fit.h_max;
  j["points_used"] = fit.points_used;
  return j;
}

Json subadditive_to_json(const SubadditiveReport& rep) {
  Json j;
  j["h"] = rep.h;
  j["free_energy"] = rep.free_energy;
  j["sizes"] = rep.sizes;
  j["margins"] = rep.margins;
  return j;
}

Json tail_fit_to_json(const ContactTailFit& fit) {
  Json j;
  j["slope"] = fit.slope;
  j["band_lo"] = fit.band_lo;
  j["band_hi"] = fit.band_hi;
  j["a_lo"] = fit.a_lo;
  j["a_hi"] = fit.a_hi;
  j["a_max_used"] = fit.a_max_used;
  j["window_mass"] = fit.window_mass;
  j["mean_probs"] = fit.mean_probs;
  return j;
}

Json scaling_to_json(const ContactScaling& scaling) {
  Json j;
  j["sizes"] = scaling.sizes;
  j["mean_contacts"] = scaling.mean_contacts;
  j["slope"] = scaling.slope;
  return j;
}

Json covariance_to_json(const CovarianceTable& table) {
  Json j;
  j["base_index"] = table.base_index;
  j["values"] = table.values;
  return j;
}

}  // namespace pinlab
