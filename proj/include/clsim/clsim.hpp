#pragma once

#include "clsim/constants.hpp"
#include "clsim/coupling.hpp"
#include "clsim/limits.hpp"
#include "clsim/oracle.hpp"
#include "clsim/params.hpp"
#include "clsim/response.hpp"
#include "clsim/scenario.hpp"
#include "clsim/special.hpp"
