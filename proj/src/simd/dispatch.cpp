#include "banach/simd/kernels.hpp"

#include <atomic>

namespace banach::simd {

#if defined(BANACH_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table() noexcept;
}
#endif

namespace {

bool host_has_avx2() noexcept {
#if defined(BANACH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* detect() noexcept {
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

}  // namespace

const KernelTable* avx2_kernels() noexcept {
#if defined(BANACH_HAVE_AVX2)
    static const bool ok = host_has_avx2();
    return ok ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept {
    const KernelTable* t = isa == Isa::Scalar ? &scalar_kernels() : avx2_kernels();
    if (t == nullptr) return false;
    current().store(t, std::memory_order_release);
    return true;
}

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace banach::simd
