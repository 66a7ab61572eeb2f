#pragma once

#include <string>

#include "json.hpp"
#include "pinlab/analysis.hpp"
#include "pinlab/environment.hpp"
#include "pinlab/pinning.hpp"

namespace pinlab {

// Key-order-preserving JSON value used for every document the tool writes,
// so identical inputs produce byte-identical files.
using Json = nlohmann::ordered_json;

// Log-domain tables are tagged with "scale": "log" so a consumer can never
// mistake them for linear probabilities.
Json partition_to_json(const PartitionTable& table);
Json contacts_to_json(const ContactDistribution& dist);
Json estimate_to_json(const FreeEnergyEstimate& est);
FreeEnergyEstimate estimate_from_json(const Json& j);  // inverse of the above
Json curve_to_json(const FreeEnergyCurve& curve);
Json exponent_fit_to_json(const ExponentFit& fit);
Json subadditive_to_json(const SubadditiveReport& rep);
Json tail_fit_to_json(const ContactTailFit& fit);
Json scaling_to_json(const ContactScaling& scaling);
Json covariance_to_json(const CovarianceTable& table);

// Fixed "%.17g" decimal form of a double (round-trip exact); throws Error on
// non-finite values (fail-closed output contract).
std::string format_double(double v);

}  // namespace pinlab
