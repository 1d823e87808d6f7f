// Umbrella header.

#pragma once

#include "qdd/analysis.hpp"
#include "qdd/circuit.hpp"
#include "qdd/dataset.hpp"
#include "qdd/dreaming.hpp"
#include "qdd/encoding.hpp"
#include "qdd/neuralnet.hpp"
#include "qdd/parallel.hpp"
#include "qdd/presets.hpp"
#include "qdd/rng.hpp"
#include "qdd/serde.hpp"
#include "qdd/simulator.hpp"
#include "qdd/vqe.hpp"
