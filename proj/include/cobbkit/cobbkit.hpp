#pragma once

// Umbrella header for the Cobb-angle estimation toolkit.

#include <cobbkit/cobb.hpp>
#include <cobbkit/errors.hpp>
#include <cobbkit/geometry.hpp>
#include <cobbkit/io.hpp>
#include <cobbkit/metrics.hpp>
#include <cobbkit/pipeline.hpp>
#include <cobbkit/postprocess.hpp>
#include <cobbkit/svg.hpp>
#include <cobbkit/synth.hpp>
