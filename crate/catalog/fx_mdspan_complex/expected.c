void gather(double ***a, double *out, int i, int j, int k)
{
    out[0] = a[f(i), j+1, k*2];
    out[1] = a[i, j, k] + a[k, j, i];
}
