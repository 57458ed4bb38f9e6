#pragma once

#include "builders.hpp"
#include "cohomology.hpp"
#include "conjugacy.hpp"
#include "core.hpp"
#include "gluing.hpp"
#include "isotopy.hpp"
#include "signature.hpp"
