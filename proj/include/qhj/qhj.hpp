#pragma once

#include "qhj/microstate.hpp"
#include "qhj/model.hpp"
#include "qhj/schrodinger.hpp"
#include "qhj/trajectory.hpp"
#include "qhj/verify.hpp"
