double norm(const double *x, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i] * x[i];
    }
    return s;
}
