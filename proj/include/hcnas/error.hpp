#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hcnas {

enum class ErrorKind {
  ShapeMismatch,
  Invariant,
  Parse,
  Infeasible,
  NotDiscrete,
  DegenerateRow,
  TooLarge,
  Numeric,
  Input,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Infeasible budget; carries the minimal achievable cost so callers can
// report how far off the budget is.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string msg, double minimal_cost)
      : Error(ErrorKind::Infeasible, std::move(msg)),
        minimal_cost_(minimal_cost) {}

  double minimal_cost() const { return minimal_cost_; }

 private:
  double minimal_cost_;
};

}  // namespace hcnas
