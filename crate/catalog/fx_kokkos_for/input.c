#include <cmath>

void scale(double *x, int n, double a)
{
    for (int j = 0; j < n; ++j) { x[j] = a * x[j]; }
}
