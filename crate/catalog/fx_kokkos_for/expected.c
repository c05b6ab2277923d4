#include <Kokkos_Core.hpp>
#include <cmath>

void scale(double *x, int n, double a)
{
    parallel_for(RangePolicy<HostExecutionSpace>(0,n), KOKKOS_LAMBDA(const int i){ x[j] = a * x[j]; });
}
