#include <omp.h>
#include <likwid-marker.h>
#include <stdio.h>

void scale(double *x, int n, double a)
{
    #pragma omp parallel for
    {
        LIKWID_MARKER_START(__func__);
        for (int i = 0; i < n; ++i) {
            x[i] = a * x[i];
        }
        LIKWID_MARKER_STOP(__func__);
    }
}

double asum(const double *x, int n)
{
    double s = 0.0;
    #pragma omp parallel for reduction(+:s)
    {
        LIKWID_MARKER_START(__func__);
        for (int i = 0; i < n; ++i) {
            s = s + x[i];
        }
        LIKWID_MARKER_STOP(__func__);
    }
    return s;
}
