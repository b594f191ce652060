#pragma once

#include <stdexcept>
#include <string>

namespace normsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Engine / scenario errors.
struct IllegalAction : Error { using Error::Error; };
struct MissingAction : Error { using Error::Error; };
struct StaleState : Error { using Error::Error; };
struct SpawnOverflow : Error { using Error::Error; };
struct WrongScenario : Error { using Error::Error; };
struct MixedScenarios : Error { using Error::Error; };
struct UnknownVehicle : Error { using Error::Error; };
struct InactiveVehicle : Error { using Error::Error; };

// Prompt / config / log errors.
struct TemplateError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct CorruptLog : Error { using Error::Error; };
struct ReplayDivergence : Error { using Error::Error; };

// Provider errors. AuthError is fatal; the rest are retryable.
struct AuthError : Error { using Error::Error; };
struct NetworkError : Error { using Error::Error; };
struct RateLimited : Error { using Error::Error; };
struct TimeoutError : Error { using Error::Error; };

}  // namespace normsim
