#pragma once

#include "gridcast/adam.hpp"
#include "gridcast/analytics.hpp"
#include "gridcast/calendar.hpp"
#include "gridcast/config.hpp"
#include "gridcast/emissions.hpp"
#include "gridcast/error.hpp"
#include "gridcast/features.hpp"
#include "gridcast/impact.hpp"
#include "gridcast/lstm.hpp"
#include "gridcast/model_io.hpp"
#include "gridcast/pipeline.hpp"
#include "gridcast/timeseries.hpp"
#include "gridcast/train.hpp"
