#include <cmath>

double dot(const double *x, const double *y, int n)
{
    double result = 0.0;
    for (int i = 0; i < n; ++i) { result += x[i] * y[i]; }
    return result;
}
