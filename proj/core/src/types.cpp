#include "convoy/types.hpp"

namespace convoy {

std::string to_string(Approach a) {
  switch (a) {
    case Approach::Human: return "human";
    case Approach::Acc: return "acc";
    case Approach::DistributedGreedy: return "distributed_greedy";
    case Approach::CentralizedGreedy: return "centralized_greedy";
    case Approach::CentralizedSolver: return "centralized_solver";
  }
  return "unknown";
}

Approach parse_approach(const std::string& name) {
  if (name == "human") return Approach::Human;
  if (name == "acc") return Approach::Acc;
  if (name == "distributed_greedy") return Approach::DistributedGreedy;
  if (name == "centralized_greedy") return Approach::CentralizedGreedy;
  if (name == "centralized_solver") return Approach::CentralizedSolver;
  throw std::invalid_argument(
      "unknown approach '" + name +
      "' (expected human, acc, distributed_greedy, centralized_greedy, or "
      "centralized_solver)");
}

}  // namespace convoy
