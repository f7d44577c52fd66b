#pragma once

#include <string>

#include "spinorbit/certifier.hpp"
#include "spinorbit/config.hpp"
#include "spinorbit/oracle.hpp"
#include "spinorbit/variational.hpp"

namespace spinorbit {

/// Deterministic serialisation: keys in insertion order, two-space indent,
/// every floating-point number as "%.16e" (bit-exact round trip), non-finite
/// numbers as null.
std::string dump_json(const Json& value);

Json to_json(const Vec2& p);
Json to_json(const ExtremumSet& extrema);
Json to_json(const DefinitenessCertificate& certificate);
Json to_json(const CountPrediction& prediction);
Json to_json(const BoundReport& report);
Json to_json(const SweepResult& sweep);
Json to_json(const OracleSpectrum& spectrum);
Json to_json(const BoundValidation& validation);

}  // namespace spinorbit
