#include <omp.h>
#include <stdio.h>

void scale(double *x, int n, double a)
{
    #pragma omp parallel for
    {
        for (int i = 0; i < n; ++i) {
            x[i] = a * x[i];
        }
    }
}

double asum(const double *x, int n)
{
    double s = 0.0;
    #pragma omp parallel for reduction(+:s)
    {
        for (int i = 0; i < n; ++i) {
            s = s + x[i];
        }
    }
    return s;
}
