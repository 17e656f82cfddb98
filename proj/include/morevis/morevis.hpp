#pragma once

// Everything except the HTTP service (morevis/service.hpp), which drags in
// the socket headers.

#include "morevis/error.hpp"
#include "morevis/geometry.hpp"
#include "morevis/dataset.hpp"
#include "morevis/io.hpp"
#include "morevis/synthetic.hpp"
#include "morevis/projection.hpp"
#include "morevis/qp.hpp"
#include "morevis/miqp.hpp"
#include "morevis/layout.hpp"
#include "morevis/metrics.hpp"
#include "morevis/export.hpp"
#include "morevis/render.hpp"
