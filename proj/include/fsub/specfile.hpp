#pragma once

// Declarative custom fixtures: a JSON document naming the dimension, a
// Riemannian coefficient matrix field and an optional drift one-form (both as
// coordinate expressions), a linear projection, the chart box and the cone
// choice.  The base metric is always induced by lifting.

#include "fsub/verifier.hpp"

namespace finsub {

Fixture load_fixture_spec(const std::string& path);

// Same fixture with every Lagrangian evaluated through the
// finite-difference fallback instead of exact jets (the "fd" profile).
Fixture fixture_fd_variant(const Fixture& f);

}  // namespace finsub
