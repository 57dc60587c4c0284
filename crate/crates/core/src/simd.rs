//! Wide SIMD kernels in the linear-algebra backend can return with the upper
//! vector register state dirty. On some x86 CPUs every later SSE-encoded libm
//! call (`sin`, `exp`, ...) then runs an order of magnitude slower, so the
//! state is cleared after each backend call that precedes scalar math.

#[inline]
pub(crate) fn clear_upper_state() {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx") {
            // SAFETY: AVX support was checked just above.
            unsafe { zero_upper() }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn zero_upper() {
    std::arch::x86_64::_mm256_zeroupper();
}
