double avx512_dot_kernel (const double *x, const double *y, int n) { double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s; }
double avx10_dot_kernel (const double *x, const double *y, int n) { double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s; }
#pragma omp declare variant(v512_f) match(device={isa{"core-avx512"}})
#pragma omp declare variant(v10_f)  match(device={isa{"core-avx10"}})
double dot_kernel(const double *x, const double *y, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s;
}

void avx512_axpy_kernel (double *y, const double *x, double a, int n) { for (int i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    } }
void avx10_axpy_kernel (double *y, const double *x, double a, int n) { for (int i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    } }
#pragma omp declare variant(v512_f) match(device={isa{"core-avx512"}})
#pragma omp declare variant(v10_f)  match(device={isa{"core-avx10"}})
void axpy_kernel(double *y, const double *x, double a, int n)
{
    for (int i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}
