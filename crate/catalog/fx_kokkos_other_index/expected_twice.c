#include <Kokkos_Core.hpp>
#include <Kokkos_Core.hpp>
#include <cmath>

void shift(double *x, int n)
{
    for (int m = 0; m < n; ++m) { x[m] = x[m] + 1.0; }
}
