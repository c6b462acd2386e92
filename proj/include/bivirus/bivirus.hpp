#pragma once

// Competitive two-virus SIS dynamics over hypergraphs: model evaluation,
// spectral stability tests, equilibrium enumeration, trajectory integration
// and scenario handling.

#include "bivirus/model.hpp"
#include "bivirus/spectral.hpp"
#include "bivirus/equilibria.hpp"
#include "bivirus/dynamics.hpp"
#include "bivirus/rng.hpp"
#include "bivirus/scenario.hpp"
#include "bivirus/report.hpp"
