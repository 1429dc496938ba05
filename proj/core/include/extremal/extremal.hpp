#pragma once

#include "extremal/errors.hpp"
#include "extremal/expression.hpp"
#include "extremal/fields.hpp"
#include "extremal/integrate.hpp"
#include "extremal/lift.hpp"
#include "extremal/oracle.hpp"
#include "extremal/sphereflow.hpp"
#include "extremal/switching.hpp"
#include "extremal/trajectory_io.hpp"
