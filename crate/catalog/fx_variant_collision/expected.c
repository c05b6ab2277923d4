double dot3(const double *x, const double *y, int n)
{
    return x[0] * y[0] + n;
}

double avx512_avx512_dot_kernel (const double *x, const double *y, int n) { return dot3(x, y, n); }
double avx10_avx512_dot_kernel (const double *x, const double *y, int n) { return dot3(x, y, n); }
#pragma omp declare variant(v512_f) match(device={isa{"core-avx512"}})
#pragma omp declare variant(v10_f)  match(device={isa{"core-avx10"}})
double avx512_dot_kernel(const double *x, const double *y, int n)
{
    return dot3(x, y, n);
}

double avx512_dot_kernel_1 (const double *x, const double *y, int n) { return dot3(x, y, n); }
double avx10_dot_kernel (const double *x, const double *y, int n) { return dot3(x, y, n); }
#pragma omp declare variant(v512_f) match(device={isa{"core-avx512"}})
#pragma omp declare variant(v10_f)  match(device={isa{"core-avx10"}})
double dot_kernel(const double *x, const double *y, int n)
{
    return dot3(x, y, n);
}
