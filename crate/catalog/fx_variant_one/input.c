double dot3(const double *x, const double *y, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * y[i];
    }
    return s;
}

double dot_kernel(const double *x, const double *y, int n)
{
    return dot3(x, y, n);
}
