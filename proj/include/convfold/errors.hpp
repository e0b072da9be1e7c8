#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace convfold {

enum class ErrorKind {
  EmptyBody,
  NoIntersection,
  InvalidBody,
  NotAShadow,
  InvalidAlpha,
  InvalidReaction,
  UnsupportedReaction,
  NonConvergence,
  EmptyLevel,
  FoldFailed,
  DivergentIntegral,
  NonPositiveField,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyBody: return "EmptyBody";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::InvalidBody: return "InvalidBody";
    case ErrorKind::NotAShadow: return "NotAShadow";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::InvalidReaction: return "InvalidReaction";
    case ErrorKind::UnsupportedReaction: return "UnsupportedReaction";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::EmptyLevel: return "EmptyLevel";
    case ErrorKind::FoldFailed: return "FoldFailed";
    case ErrorKind::DivergentIntegral: return "DivergentIntegral";
    case ErrorKind::NonPositiveField: return "NonPositiveField";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace convfold
