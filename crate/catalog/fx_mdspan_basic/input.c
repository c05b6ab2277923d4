double sum3(double ***a, int i, int j, int k)
{
    return a[i][j][k];
}
