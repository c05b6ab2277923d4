double dot_kernel(const double *x, const double *y, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s;
}

void axpy_kernel(double *y, const double *x, double a, int n)
{
    for (int i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}
