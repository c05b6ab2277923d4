#include <Kokkos_Core.hpp>
#include <Kokkos_Core.hpp>
#include <cmath>

double dot(const double *x, const double *y, int n)
{
    double result = 0.0;
    parallel_reduce(RangePolicy<HostExecutionSpace>(0,n), KOKKOS_LAMBDA(const int i){ result += x[i] * y[i]; });
    return result;
}
