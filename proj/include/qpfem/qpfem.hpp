#pragma once

#include "qpfem/error.hpp"
#include "qpfem/quadrature.hpp"
#include "qpfem/mesh.hpp"
#include "qpfem/fe_space.hpp"
#include "qpfem/problem.hpp"
#include "qpfem/banded.hpp"
#include "qpfem/assembly.hpp"
#include "qpfem/projection.hpp"
#include "qpfem/timestepper.hpp"
#include "qpfem/error_lab.hpp"
#include "qpfem/study.hpp"
#include "qpfem/config.hpp"
#include "qpfem/suites.hpp"
