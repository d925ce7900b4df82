#pragma once

namespace pixyz {

/// Name of the OpenBLAS core in use, or nullptr if OpenBLAS is not loaded.
const char* blas_core_name();

/// On hosts where OpenBLAS picks an AVX-512 core, re-executes the current
/// program with OPENBLAS_CORETYPE=Haswell. The AVX-512 kernels return wrong
/// dense updates under some hypervisors, which corrupts sparse LU factors.
/// No-op if OPENBLAS_CORETYPE is already set, PIXYZ_KEEP_BLAS_CORE is set,
/// or the host lacks AVX2. Call first thing in main().
void select_reliable_blas_core(char** argv);

}  // namespace pixyz
