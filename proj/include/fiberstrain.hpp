#ifndef FIBERSTRAIN_HPP
#define FIBERSTRAIN_HPP

#include "fiberstrain/error.hpp"
#include "fiberstrain/tensor.hpp"
#include "fiberstrain/format.hpp"
#include "fiberstrain/material_io.hpp"
#include "fiberstrain/stp.hpp"
#include "fiberstrain/mesh.hpp"
#include "fiberstrain/msh_io.hpp"
#include "fiberstrain/sparse.hpp"
#include "fiberstrain/fem.hpp"
#include "fiberstrain/pipeline.hpp"

#endif  // FIBERSTRAIN_HPP
