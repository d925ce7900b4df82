#include "pixyz/platform.hpp"

#include <dlfcn.h>
#include <unistd.h>

#include <cctype>
#include <cstdlib>
#include <string>

#include "pixyz/kernels.hpp"

namespace pixyz {

const char* blas_core_name() {
  using Fn = char* (*)();
  auto fn = reinterpret_cast<Fn>(dlsym(RTLD_DEFAULT, "openblas_get_corename"));
  return fn ? fn() : nullptr;
}

void select_reliable_blas_core(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") || std::getenv("PIXYZ_KEEP_BLAS_CORE")) return;
  const char* core = blas_core_name();
  if (!core) return;
  std::string lower(core);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const bool avx512 = lower == "skylakex" || lower == "cooperlake" || lower == "sapphirerapids";
  if (!avx512 || !kernels::isa_available(kernels::Isa::avx2)) return;
  setenv("OPENBLAS_CORETYPE", "Haswell", 1);
  execv("/proc/self/exe", argv);
  // exec failed: carry on with the default core
}

}  // namespace pixyz
