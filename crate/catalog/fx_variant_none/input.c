double helper(const double *x, int n)
{
    double s = x[0] + n;
    return s;
}
