double dot3(const double *x, const double *y, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s;
}

double avx512_dot_kernel (const double *x, const double *y, int n) { return dot3(x, y, n); }
double avx10_dot_kernel (const double *x, const double *y, int n) { return dot3(x, y, n); }
#pragma omp declare variant(v512_f) match(device={isa{"core-avx512"}})
#pragma omp declare variant(v10_f)  match(device={isa{"core-avx10"}})
double dot_kernel(const double *x, const double *y, int n)
{
    return dot3(x, y, n);
}
